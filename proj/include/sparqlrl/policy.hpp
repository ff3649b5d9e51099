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

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sparqlrl/corpus.hpp"

namespace sparqlrl {

/// Everything a policy may condition on for one question.
struct PolicyPrompt {
  std::string id;
  Prompt prompt;
  std::string question;
  std::vector<EntityHint> entities;
  std::vector<RelationHint> relations;
  bool cot = true;
};

PolicyPrompt make_policy_prompt(const QAInstance& instance, bool cot);

/// Prompt in the policy's own input representation: active feature ids and
/// the set of tokens that may be emitted at all.
struct EncodedPrompt {
  std::vector<int> features;
  std::vector<std::uint8_t> allowed;
};

struct DecodingConfig {
  /// 0 selects greedy decoding.
  double temperature = 0.6;
  double top_p = 0.95;
  /// 0 disables top-k truncation.
  int top_k = 20;
  int max_new_tokens = 1024;
};

struct SampleResult {
  /// Generated tokens, ending with the terminator unless truncated.
  std::vector<int> tokens;
  /// Sum of chosen-token log-probabilities under the truncated, renormalized
  /// sampling distribution.
  double log_prob = 0.0;
  /// max_new_tokens reached without a terminator.
  bool truncated = false;
};

class OutOfVocabulary : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Autoregressive categorical policy over a closed vocabulary.
///
/// Implementations provide next-token logits for a prefix and the
/// corresponding vector-Jacobian product; sampling, sequence log-probs, KL
/// and their gradients are built on top of those two.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::size_t vocab_size() const = 0;
  virtual int eos_token() const = 0;
  virtual std::string token_name(int token) const = 0;

  virtual EncodedPrompt encode(const PolicyPrompt& prompt) const = 0;

  /// Next-token logits after `prefix`; disallowed tokens get -infinity.
  virtual void logits(const EncodedPrompt& prompt, std::span<const int> prefix,
                      std::span<double> out) const = 0;

  /// grad += scale * J^T dlogits, J being d logits / d parameters at `prefix`.
  virtual void add_logit_gradient(const EncodedPrompt& prompt, std::span<const int> prefix,
                                  std::span<const double> dlogits, double scale,
                                  std::span<double> grad) const = 0;

  virtual std::span<const double> parameters() const = 0;
  virtual std::span<double> mutable_parameters() = 0;

  virtual std::unique_ptr<Policy> clone() const = 0;

  /// Completion text for generated tokens (terminator dropped).
  virtual std::string detokenize(const PolicyPrompt& prompt, std::span<const int> tokens) const = 0;
  /// Token sequence (terminator appended) that detokenizes to `text` up to
  /// whitespace. Throws OutOfVocabulary.
  virtual std::vector<int> tokenize_target(const PolicyPrompt& prompt,
                                           std::string_view text) const = 0;
};

/// Softmax of the logits after `prefix`; sums to 1.
std::vector<double> token_distribution(const Policy& policy, const EncodedPrompt& prompt,
                                       std::span<const int> prefix);

/// log pi(tokens | prompt), exact.
double log_prob(const Policy& policy, const EncodedPrompt& prompt, std::span<const int> tokens);

/// Adds scale * d log pi(tokens) / d theta to grad and returns log pi(tokens).
double add_log_prob_gradient(const Policy& policy, const EncodedPrompt& prompt,
                             std::span<const int> tokens, double scale, std::span<double> grad);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);

/// Temperature, then top-k, then top-p (nucleus) truncation, renormalized.
std::vector<double> sampling_distribution(std::span<const double> logits,
                                          const DecodingConfig& config);

SampleResult sample(const Policy& policy, const EncodedPrompt& prompt, const DecodingConfig& config,
                    std::mt19937_64& rng);

/// Exact KL(p || q) between two categorical distributions.
double categorical_kl(std::span<const double> p, std::span<const double> q);

/// Sum over positions of KL(policy(.|prefix) || ref(.|prefix)) along `tokens`.
/// Throws std::invalid_argument when the vocabularies differ.
double sequence_kl(const Policy& policy, const Policy& ref, const EncodedPrompt& prompt,
                   std::span<const int> tokens);

/// Adds scale * d sequence_kl / d theta (through `policy` only) to grad and
/// returns the KL.
double add_sequence_kl_gradient(const Policy& policy, const Policy& ref,
                                const EncodedPrompt& prompt, std::span<const int> tokens,
                                double scale, std::span<double> grad);

/// Largest relative error |a - n| / max(|a|, |n|, 1e-5) between the analytic
/// gradient of log_prob and central differences with step h, over
/// `indices` (all parameters when empty).
double grad_check(Policy& policy, const EncodedPrompt& prompt, std::span<const int> tokens,
                  double h, std::vector<std::size_t> indices = {});

}  // namespace sparqlrl
