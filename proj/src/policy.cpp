// Copyright 2026 The sparqlrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sparqlrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sparqlrl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Stable log-softmax; -inf logits stay -inf.
std::vector<double> log_softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) {
    if (v != kNegInf) sum += std::exp(v - m);
  }
  const double log_z = m + std::log(sum);
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] == kNegInf ? kNegInf : z[i] - log_z;
  return out;
}

std::vector<double> exp_all(const std::vector<double>& logp) {
  std::vector<double> p(logp.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = logp[i] == kNegInf ? 0.0 : std::exp(logp[i]);
  return p;
}

void check_token(const Policy& policy, int token) {
  if (token < 0 || static_cast<std::size_t>(token) >= policy.vocab_size()) {
    throw std::out_of_range("token id " + std::to_string(token) + " outside vocabulary");
  }
}

}  // namespace

PolicyPrompt make_policy_prompt(const QAInstance& instance, bool cot) {
  return PolicyPrompt{instance.id,       render_prompt(instance, cot), instance.question,
                      instance.entities, instance.relations,           cot};
}

std::vector<double> token_distribution(const Policy& policy, const EncodedPrompt& prompt,
                                       std::span<const int> prefix) {
  std::vector<double> z(policy.vocab_size());
  policy.logits(prompt, prefix, z);
  return exp_all(log_softmax(z));
}

double log_prob(const Policy& policy, const EncodedPrompt& prompt, std::span<const int> tokens) {
  std::vector<double> z(policy.vocab_size());
  double total = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    check_token(policy, tokens[t]);
    policy.logits(prompt, tokens.first(t), z);
    total += log_softmax(z)[static_cast<std::size_t>(tokens[t])];
  }
  return total;
}

double add_log_prob_gradient(const Policy& policy, const EncodedPrompt& prompt,
                             std::span<const int> tokens, double scale, std::span<double> grad) {
  std::vector<double> z(policy.vocab_size());
  std::vector<double> dz(policy.vocab_size());
  double total = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    check_token(policy, tokens[t]);
    const auto prefix = tokens.first(t);
    policy.logits(prompt, prefix, z);
    const auto logp = log_softmax(z);
    const auto y = static_cast<std::size_t>(tokens[t]);
    total += logp[y];
    if (scale == 0.0) continue;
    for (std::size_t j = 0; j < dz.size(); ++j) {
      dz[j] = (j == y ? 1.0 : 0.0) - (logp[j] == kNegInf ? 0.0 : std::exp(logp[j]));
    }
    policy.add_logit_gradient(prompt, prefix, dz, scale, grad);
  }
  return total;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> sampling_distribution(std::span<const double> logits,
                                          const DecodingConfig& config) {
  const std::size_t n = logits.size();
  std::vector<double> p(n, 0.0);
  if (config.temperature <= 0.0) {
    p[static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin())] = 1.0;
    return p;
  }
  std::vector<double> scaled(logits.begin(), logits.end());
  for (double& v : scaled) {
    if (v != kNegInf) v /= config.temperature;
  }
  p = exp_all(log_softmax(scaled));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  std::size_t keep = n;
  if (config.top_k > 0) keep = std::min(keep, static_cast<std::size_t>(config.top_k));
  if (config.top_p < 1.0) {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < keep; ++i) {
      cumulative += p[order[i]];
      if (cumulative >= config.top_p) {
        keep = i + 1;
        break;
      }
    }
  }
  double kept_mass = 0.0;
  for (std::size_t i = 0; i < keep; ++i) kept_mass += p[order[i]];
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < keep; ++i) out[order[i]] = p[order[i]] / kept_mass;
  return out;
}

SampleResult sample(const Policy& policy, const EncodedPrompt& prompt, const DecodingConfig& config,
                    std::mt19937_64& rng) {
  SampleResult result;
  std::vector<double> z(policy.vocab_size());
  result.truncated = true;
  for (int step = 0; step < config.max_new_tokens; ++step) {
    policy.logits(prompt, result.tokens, z);
    const auto dist = sampling_distribution(z, config);
    std::size_t chosen = 0;
    if (config.temperature <= 0.0) {
      chosen = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
    } else {
      const double u = uniform01(rng);
      double cumulative = 0.0;
      chosen = dist.size();
      for (std::size_t j = 0; j < dist.size(); ++j) {
        if (dist[j] <= 0.0) continue;
        cumulative += dist[j];
        chosen = j;
        if (u < cumulative) break;
      }
    }
    result.log_prob += std::log(dist[chosen]);
    result.tokens.push_back(static_cast<int>(chosen));
    if (static_cast<int>(chosen) == policy.eos_token()) {
      result.truncated = false;
      break;
    }
  }
  return result;
}

double categorical_kl(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions of different size");
  double kl = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    if (q[j] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p[j] * (std::log(p[j]) - std::log(q[j]));
  }
  return std::max(0.0, kl);
}

double sequence_kl(const Policy& policy, const Policy& ref, const EncodedPrompt& prompt,
                   std::span<const int> tokens) {
  return add_sequence_kl_gradient(policy, ref, prompt, tokens, 0.0, {});
}

double add_sequence_kl_gradient(const Policy& policy, const Policy& ref,
                                const EncodedPrompt& prompt, std::span<const int> tokens,
                                double scale, std::span<double> grad) {
  if (policy.vocab_size() != ref.vocab_size()) {
    throw std::invalid_argument("policy and reference vocabularies differ");
  }
  const std::size_t v = policy.vocab_size();
  std::vector<double> zp(v), zq(v), dz(v);
  double total = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto prefix = tokens.first(t);
    policy.logits(prompt, prefix, zp);
    ref.logits(prompt, prefix, zq);
    const auto lp = log_softmax(zp);
    const auto lq = log_softmax(zq);
    double kl = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      if (lp[j] == kNegInf) continue;
      kl += std::exp(lp[j]) * (lp[j] - lq[j]);
    }
    kl = std::max(0.0, kl);
    total += kl;
    if (scale == 0.0) continue;
    for (std::size_t j = 0; j < v; ++j) {
      dz[j] = lp[j] == kNegInf ? 0.0 : std::exp(lp[j]) * (lp[j] - lq[j] - kl);
    }
    policy.add_logit_gradient(prompt, prefix, dz, scale, grad);
  }
  return total;
}

double grad_check(Policy& policy, const EncodedPrompt& prompt, std::span<const int> tokens,
                  double h, std::vector<std::size_t> indices) {
  auto params = policy.mutable_parameters();
  std::vector<double> analytic(params.size(), 0.0);
  add_log_prob_gradient(policy, prompt, tokens, 1.0, analytic);
  if (indices.empty()) {
    indices.resize(params.size());
    std::iota(indices.begin(), indices.end(), 0);
  }
  double worst = 0.0;
  for (std::size_t i : indices) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = log_prob(policy, prompt, tokens);
    params[i] = saved - h;
    const double down = log_prob(policy, prompt, tokens);
    params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-5});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace sparqlrl
