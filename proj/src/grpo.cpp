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

#include "sparqlrl/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sparqlrl/parallel.hpp"

namespace sparqlrl {

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                    std::string_view what) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw std::invalid_argument("unknown " + std::string(what) + " key '" + key + "'");
    }
  }
}

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string rng_state(const std::mt19937_64& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void restore_rng(std::mt19937_64& rng, const std::string& state) {
  std::istringstream in(state);
  in >> rng;
  if (!in) throw std::invalid_argument("malformed RNG state");
}

void add_scaled(std::vector<double>& acc, std::span<const double> g, double scale) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * g[i];
}

void fill_reward_stats(const std::vector<RolloutGroup>& groups, UpdateStats& stats) {
  std::vector<double> totals;
  double abs_adv = 0.0, length = 0.0, truncated = 0.0;
  std::map<std::string, std::pair<double, int>> components;
  for (const auto& group : groups) {
    for (const auto& r : group.rollouts) {
      totals.push_back(r.reward.total);
      abs_adv += std::abs(r.advantage);
      length += static_cast<double>(r.tokens.size()) -
                (!r.truncated && !r.tokens.empty() ? 1.0 : 0.0);
      truncated += r.truncated ? 1.0 : 0.0;
      for (RewardComponent c : kAllRewardComponents) {
        if (auto v = r.reward.get(c)) {
          auto& [sum, count] = components[to_string(c)];
          sum += *v;
          ++count;
        }
      }
    }
  }
  if (totals.empty()) return;
  const double n = static_cast<double>(totals.size());
  double mean = 0.0;
  for (double t : totals) mean += t;
  mean /= n;
  double var = 0.0;
  for (double t : totals) var += (t - mean) * (t - mean);
  stats.mean_reward = mean;
  stats.reward_std = std::sqrt(var / n);
  stats.mean_abs_advantage = abs_adv / n;
  stats.mean_length = length / n;
  stats.truncated_fraction = truncated / n;
  stats.component_means.clear();
  for (RewardComponent c : kAllRewardComponents) {
    if (auto it = components.find(to_string(c)); it != components.end()) {
      stats.component_means.emplace_back(it->first, it->second.first / it->second.second);
    }
  }
}

}  // namespace

std::vector<double> group_advantages(std::span<const double> rewards, double eps_std) {
  if (rewards.size() < 2) throw std::invalid_argument("group_advantages needs at least two rewards");
  // Exact zeros for a constant group.
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  if (*lo == *hi) return std::vector<double>(rewards.size(), 0.0);
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double denom = std::sqrt(var / n) + eps_std;
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back(denom > 0.0 ? (r - mean) / denom : 0.0);
  return out;
}

ClippedTerm clipped_term(double ratio, double advantage, double eps) {
  const double unclipped = ratio * advantage;
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage;
  if (clipped < unclipped) return {clipped, 0.0, true};
  return {unclipped, advantage, false};
}

void GrpoConfig::validate() const {
  if (group_size < 2) throw std::invalid_argument("group_size must be at least 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw std::invalid_argument("clip_epsilon must be in (0, 1)");
  }
  if (!(kl_beta >= 0.0)) throw std::invalid_argument("kl_beta must be non-negative");
  if (!(eps_std >= 0.0)) throw std::invalid_argument("eps_std must be non-negative");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (grad_accum < 1) throw std::invalid_argument("grad_accum must be positive");
  if (iterations_per_batch < 1) throw std::invalid_argument("iterations_per_batch must be positive");
  if (!(decoding.temperature >= 0.0)) throw std::invalid_argument("temperature must be non-negative");
  if (!(decoding.top_p > 0.0 && decoding.top_p <= 1.0)) {
    throw std::invalid_argument("top_p must be in (0, 1]");
  }
  if (decoding.top_k < 0) throw std::invalid_argument("top_k must be non-negative");
  if (decoding.max_new_tokens < 1) throw std::invalid_argument("max_new_tokens must be positive");
  if (!std::isfinite(reward_failure_total)) {
    throw std::invalid_argument("reward_failure_total must be finite");
  }
  optimizer.validate();
}

nlohmann::json decoding_config_to_json(const DecodingConfig& c) {
  return {{"temperature", c.temperature},
          {"top_p", c.top_p},
          {"top_k", c.top_k},
          {"max_new_tokens", c.max_new_tokens}};
}

DecodingConfig decoding_config_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"temperature", "top_p", "top_k", "max_new_tokens"}, "decoding");
  DecodingConfig c;
  read_if(j, "temperature", c.temperature);
  read_if(j, "top_p", c.top_p);
  read_if(j, "top_k", c.top_k);
  read_if(j, "max_new_tokens", c.max_new_tokens);
  return c;
}

nlohmann::json grpo_config_to_json(const GrpoConfig& c) {
  return {{"group_size", c.group_size},
          {"clip_epsilon", c.clip_epsilon},
          {"kl_beta", c.kl_beta},
          {"eps_std", c.eps_std},
          {"batch_size", c.batch_size},
          {"grad_accum", c.grad_accum},
          {"iterations_per_batch", c.iterations_per_batch},
          {"optimizer", adamw_config_to_json(c.optimizer)},
          {"decoding", decoding_config_to_json(c.decoding)},
          {"cot", c.cot},
          {"seed", c.seed},
          {"reward_failure_total", c.reward_failure_total},
          {"threads", c.threads}};
}

GrpoConfig grpo_config_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"group_size", "clip_epsilon", "kl_beta", "eps_std", "batch_size", "grad_accum",
                  "iterations_per_batch", "optimizer", "decoding", "cot", "seed",
                  "reward_failure_total", "threads"},
                 "GRPO config");
  GrpoConfig c;
  read_if(j, "group_size", c.group_size);
  read_if(j, "clip_epsilon", c.clip_epsilon);
  read_if(j, "kl_beta", c.kl_beta);
  read_if(j, "eps_std", c.eps_std);
  read_if(j, "batch_size", c.batch_size);
  read_if(j, "grad_accum", c.grad_accum);
  read_if(j, "iterations_per_batch", c.iterations_per_batch);
  if (j.contains("optimizer")) c.optimizer = adamw_config_from_json(j.at("optimizer"));
  if (j.contains("decoding")) c.decoding = decoding_config_from_json(j.at("decoding"));
  read_if(j, "cot", c.cot);
  read_if(j, "seed", c.seed);
  read_if(j, "reward_failure_total", c.reward_failure_total);
  read_if(j, "threads", c.threads);
  return c;
}

nlohmann::json update_stats_to_json(const UpdateStats& s) {
  nlohmann::json components = nlohmann::json::object();
  for (const auto& [name, value] : s.component_means) components[name] = value;
  return {{"step", s.step},
          {"optimizer_step", s.optimizer_step},
          {"optimizer_stepped", s.optimizer_stepped},
          {"learning_rate", s.learning_rate},
          {"mean_reward", s.mean_reward},
          {"reward_std", s.reward_std},
          {"mean_abs_advantage", s.mean_abs_advantage},
          {"clip_fraction", s.clip_fraction},
          {"kl", s.kl},
          {"objective", s.objective},
          {"grad_norm", s.grad_norm},
          {"mean_length", s.mean_length},
          {"truncated_fraction", s.truncated_fraction},
          {"components", components},
          {"ratios", s.ratios},
          {"advantages", s.advantages}};
}

std::vector<RolloutGroup> sample_groups(std::span<const QAInstance* const> batch,
                                        const Policy& old_policy, const RewardFn& reward_fn,
                                        const GrpoConfig& config, std::mt19937_64& rng) {
  std::vector<std::uint64_t> seeds(batch.size());
  for (auto& s : seeds) s = rng();
  std::vector<RolloutGroup> groups(batch.size());
  parallel_for(batch.size(), config.threads, [&](std::size_t i) {
    const QAInstance& instance = *batch[i];
    std::mt19937_64 local(seeds[i]);
    const PolicyPrompt prompt = make_policy_prompt(instance, config.cot);
    RolloutGroup& group = groups[i];
    group.prompt_id = instance.id;
    group.encoded = old_policy.encode(prompt);
    std::vector<double> totals;
    for (int g = 0; g < config.group_size; ++g) {
      Rollout r;
      SampleResult s = sample(old_policy, group.encoded, config.decoding, local);
      r.tokens = std::move(s.tokens);
      r.truncated = s.truncated;
      r.old_log_prob = log_prob(old_policy, group.encoded, r.tokens);
      r.text = old_policy.detokenize(prompt, r.tokens);
      Completion completion{r.text, r.tokens.size() - (r.truncated ? 0 : 1)};
      try {
        r.reward = reward_fn(instance, completion);
      } catch (...) {
        r.reward = RewardBreakdown{};
        r.reward.total = config.reward_failure_total;
        r.reward.execution_status = ExecutionStatus::EndpointError;
        r.reward.query_text = extract_query(r.text).query_text;
      }
      totals.push_back(r.reward.total);
      group.rollouts.push_back(std::move(r));
    }
    const auto adv = group_advantages(totals, config.eps_std);
    for (std::size_t g = 0; g < adv.size(); ++g) group.rollouts[g].advantage = adv[g];
  });
  return groups;
}

double add_grpo_gradient(const std::vector<RolloutGroup>& groups, const Policy& policy,
                         const Policy& ref, const GrpoConfig& config, double scale,
                         std::span<double> grad, UpdateStats& stats) {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.rollouts.size();
  if (n == 0) return 0.0;
  const double w = 1.0 / static_cast<double>(n);
  double objective = 0.0, kl_sum = 0.0;
  std::size_t clipped = 0;
  stats.ratios.clear();
  stats.advantages.clear();
  for (const auto& group : groups) {
    for (const auto& r : group.rollouts) {
      const double logp = log_prob(policy, group.encoded, r.tokens);
      const double ratio = std::exp(logp - r.old_log_prob);
      const ClippedTerm term = clipped_term(ratio, r.advantage, config.clip_epsilon);
      if (term.ratio_derivative != 0.0 && scale != 0.0) {
        // d ratio / d theta = ratio * d log pi / d theta
        add_log_prob_gradient(policy, group.encoded, r.tokens,
                              scale * w * term.ratio_derivative * ratio, grad);
      }
      const double kl = add_sequence_kl_gradient(policy, ref, group.encoded, r.tokens,
                                                 -scale * w * config.kl_beta, grad);
      objective += w * (term.value - config.kl_beta * kl);
      kl_sum += kl;
      clipped += term.clipped;
      stats.ratios.push_back(ratio);
      stats.advantages.push_back(r.advantage);
    }
  }
  stats.kl = kl_sum * w;
  stats.clip_fraction = static_cast<double>(clipped) * w;
  return objective;
}

GrpoTrainer::GrpoTrainer(Policy& policy, std::unique_ptr<Policy> ref, RewardFn reward_fn,
                         GrpoConfig config, std::int64_t planned_optimizer_steps)
    : policy_(policy),
      ref_(std::move(ref)),
      old_(policy.clone()),
      reward_fn_(std::move(reward_fn)),
      config_(config),
      planned_steps_(planned_optimizer_steps),
      optimizer_(policy.parameters().size(), config.optimizer),
      rng_(config.seed),
      accumulated_(policy.parameters().size(), 0.0) {
  config_.validate();
  if (!ref_) throw std::invalid_argument("GRPO needs a reference policy");
  if (ref_->parameters().size() != policy_.parameters().size() ||
      ref_->vocab_size() != policy_.vocab_size()) {
    throw std::invalid_argument("reference policy does not match the trained policy");
  }
}

void GrpoTrainer::apply(std::span<const double> grad, UpdateStats& stats) {
  const double lr = scheduled_learning_rate(config_.optimizer, optimizer_.steps(), planned_steps_);
  optimizer_.ascend(policy_.mutable_parameters(), grad, lr);
  stats.optimizer_stepped = true;
  stats.learning_rate = lr;
}

UpdateStats GrpoTrainer::step(std::span<const QAInstance* const> batch) {
  if (batch.empty()) throw std::invalid_argument("empty GRPO batch");
  for (double p : policy_.parameters()) {
    if (!std::isfinite(p)) throw std::runtime_error("policy parameters are not finite");
  }
  UpdateStats stats;
  stats.step = ++micro_steps_;
  auto groups = sample_groups(batch, *old_, reward_fn_, config_, rng_);
  fill_reward_stats(groups, stats);

  std::vector<double> grad(accumulated_.size(), 0.0);
  stats.objective = add_grpo_gradient(groups, policy_, *ref_, config_, 1.0, grad, stats);
  check_finite_gradient(grad, "GRPO micro-batch " + std::to_string(stats.step) + " (first prompt " +
                                  groups.front().prompt_id + ")");
  stats.grad_norm = l2_norm(grad);
  add_scaled(accumulated_, grad, 1.0 / config_.grad_accum);
  pending_.push_back(std::move(groups));
  stats.learning_rate =
      scheduled_learning_rate(config_.optimizer, optimizer_.steps(), planned_steps_);

  if (static_cast<int>(pending_.size()) == config_.grad_accum) {
    apply(accumulated_, stats);
    for (int it = 1; it < config_.iterations_per_batch; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      UpdateStats scratch;
      for (const auto& g : pending_) {
        add_grpo_gradient(g, policy_, *ref_, config_, 1.0 / config_.grad_accum, grad, scratch);
      }
      check_finite_gradient(grad, "GRPO reuse iteration " + std::to_string(it + 1));
      apply(grad, stats);
    }
    old_ = policy_.clone();
    pending_.clear();
    std::fill(accumulated_.begin(), accumulated_.end(), 0.0);
  }
  stats.optimizer_step = optimizer_.steps();
  return stats;
}

nlohmann::json GrpoTrainer::state_to_json() const {
  if (!at_boundary()) throw std::logic_error("GRPO state requested inside an accumulation window");
  return {{"kind", "grpo"},
          {"micro_steps", micro_steps_},
          {"optimizer", optimizer_.state_to_json()},
          {"rng", rng_state(rng_)}};
}

void GrpoTrainer::load_state(const nlohmann::json& j) {
  if (j.at("kind") != "grpo") throw std::invalid_argument("not a GRPO trainer state");
  micro_steps_ = j.at("micro_steps").get<std::int64_t>();
  optimizer_.load_state(j.at("optimizer"));
  restore_rng(rng_, j.at("rng").get<std::string>());
  old_ = policy_.clone();
  pending_.clear();
  std::fill(accumulated_.begin(), accumulated_.end(), 0.0);
}

void SupervisedConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (grad_accum < 1) throw std::invalid_argument("grad_accum must be positive");
  optimizer.validate();
}

nlohmann::json supervised_config_to_json(const SupervisedConfig& c) {
  return {{"batch_size", c.batch_size},
          {"grad_accum", c.grad_accum},
          {"optimizer", adamw_config_to_json(c.optimizer)},
          {"seed", c.seed}};
}

SupervisedConfig supervised_config_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"batch_size", "grad_accum", "optimizer", "seed"}, "supervised config");
  SupervisedConfig c;
  read_if(j, "batch_size", c.batch_size);
  read_if(j, "grad_accum", c.grad_accum);
  if (j.contains("optimizer")) c.optimizer = adamw_config_from_json(j.at("optimizer"));
  read_if(j, "seed", c.seed);
  return c;
}

SupervisedExample make_supervised_example(const Policy& policy, const QAInstance& instance) {
  if (!instance.gold_query) {
    throw std::invalid_argument("instance " + instance.id + " has no gold query");
  }
  const PolicyPrompt prompt = make_policy_prompt(instance, false);
  try {
    return {instance.id, policy.encode(prompt), policy.tokenize_target(prompt, *instance.gold_query)};
  } catch (const OutOfVocabulary& e) {
    throw OutOfVocabulary("instance " + instance.id + ": " + e.what());
  }
}

double add_supervised_gradient(std::span<const SupervisedExample> batch, const Policy& policy,
                               double scale, std::span<double> grad) {
  std::size_t tokens = 0;
  for (const auto& ex : batch) tokens += ex.tokens.size();
  if (tokens == 0) return 0.0;
  const double w = 1.0 / static_cast<double>(tokens);
  double total = 0.0;
  for (const auto& ex : batch) {
    total += add_log_prob_gradient(policy, ex.encoded, ex.tokens, scale * w, grad);
  }
  return total * w;
}

SupervisedTrainer::SupervisedTrainer(Policy& policy, SupervisedConfig config,
                                     std::int64_t planned_optimizer_steps)
    : policy_(policy),
      config_(config),
      planned_steps_(planned_optimizer_steps),
      optimizer_(policy.parameters().size(), config.optimizer),
      accumulated_(policy.parameters().size(), 0.0) {
  config_.validate();
}

UpdateStats SupervisedTrainer::step(std::span<const SupervisedExample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty supervised batch");
  UpdateStats stats;
  stats.step = ++micro_steps_;
  std::vector<double> grad(accumulated_.size(), 0.0);
  stats.objective = add_supervised_gradient(batch, policy_, 1.0, grad);
  check_finite_gradient(grad, "supervised micro-batch " + std::to_string(stats.step));
  stats.grad_norm = l2_norm(grad);
  double length = 0.0;
  for (const auto& ex : batch) length += static_cast<double>(ex.tokens.size());
  stats.mean_length = length / static_cast<double>(batch.size());
  add_scaled(accumulated_, grad, 1.0 / config_.grad_accum);
  stats.learning_rate =
      scheduled_learning_rate(config_.optimizer, optimizer_.steps(), planned_steps_);
  if (++pending_ == config_.grad_accum) {
    optimizer_.ascend(policy_.mutable_parameters(), accumulated_, stats.learning_rate);
    stats.optimizer_stepped = true;
    pending_ = 0;
    std::fill(accumulated_.begin(), accumulated_.end(), 0.0);
  }
  stats.optimizer_step = optimizer_.steps();
  return stats;
}

nlohmann::json SupervisedTrainer::state_to_json() const {
  if (!at_boundary()) {
    throw std::logic_error("supervised state requested inside an accumulation window");
  }
  return {{"kind", "supervised"},
          {"micro_steps", micro_steps_},
          {"optimizer", optimizer_.state_to_json()}};
}

void SupervisedTrainer::load_state(const nlohmann::json& j) {
  if (j.at("kind") != "supervised") throw std::invalid_argument("not a supervised trainer state");
  micro_steps_ = j.at("micro_steps").get<std::int64_t>();
  optimizer_.load_state(j.at("optimizer"));
  pending_ = 0;
  std::fill(accumulated_.begin(), accumulated_.end(), 0.0);
}

void check_finite_gradient(std::span<const double> grad, std::string_view context) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      std::ostringstream msg;
      msg << "non-finite gradient in " << context << ": parameter " << i << " = " << grad[i];
      throw std::runtime_error(msg.str());
    }
  }
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace sparqlrl
