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

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparqlrl/policy.hpp"

namespace sparqlrl {

struct ToyPolicyConfig {
  /// Number of previous tokens in the logit-table context.
  int context_order = 2;
  /// Distinct values of the "entity pointers emitted so far" state.
  int slot_states = 4;

  friend bool operator==(const ToyPolicyConfig&, const ToyPolicyConfig&) = default;
};

/// Small exact-probability policy over a closed SPARQL token vocabulary.
///
/// Hint URIs are emitted through pointer tokens: <E0>..<E2> copy the i-th
/// entity hint, <R0>..<R1> the j-th relation hint and <Q0> the year literal
/// found in the question. Pointers without a referent are masked.
///
/// logit(t) = A[prev_k..prev_1, slot][t] + sum over active features f of
///            B[prev_1, slot, f][t]
///
/// where slot counts the entity pointers already emitted (capped) and the
/// features are a bias, the CoT flag, one-hot hint counts, a has-year flag
/// and a bag of question words (entity labels and years removed).
class ToyPolicy : public Policy {
 public:
  ToyPolicy(ToyPolicyConfig config, std::vector<std::string> words);

  /// Lower-cased question words over the given questions, sorted.
  static std::vector<std::string> fit_words(const std::vector<QAInstance>& instances);
  static const std::vector<std::string>& vocabulary();
  /// Token id for a vocabulary entry; throws OutOfVocabulary.
  static int token_id(std::string_view name);

  std::size_t vocab_size() const override;
  int eos_token() const override { return 0; }
  std::string token_name(int token) const override;

  EncodedPrompt encode(const PolicyPrompt& prompt) const override;
  /// Bias feature only, every pointer allowed.
  EncodedPrompt encode_unconditional() const;

  void logits(const EncodedPrompt& prompt, std::span<const int> prefix,
              std::span<double> out) const override;
  void add_logit_gradient(const EncodedPrompt& prompt, std::span<const int> prefix,
                          std::span<const double> dlogits, double scale,
                          std::span<double> grad) const override;

  std::span<const double> parameters() const override { return params_; }
  std::span<double> mutable_parameters() override { return params_; }

  std::unique_ptr<Policy> clone() const override;

  std::string detokenize(const PolicyPrompt& prompt, std::span<const int> tokens) const override;
  std::vector<int> tokenize_target(const PolicyPrompt& prompt,
                                   std::string_view text) const override;
  /// Tokens of a pointer-form line such as "SELECT ?x WHERE { ?x <R0> <E0> }".
  std::vector<int> tokenize_pointer_line(std::string_view line) const;

  /// Fills parameters with N(0, stddev^2) draws.
  void randomize(std::mt19937_64& rng, double stddev);

  const ToyPolicyConfig& config() const { return config_; }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t feature_count() const;

  /// Parameters are stored sparsely (non-zero entries only).
  nlohmann::json to_json() const;
  static ToyPolicy from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ToyPolicy load(const std::filesystem::path& path);

 private:
  std::size_t context_index(std::span<const int> prefix) const;
  int slot(std::span<const int> prefix) const;
  std::size_t table_b_offset(int prev, int slot, int feature) const;

  ToyPolicyConfig config_;
  std::vector<std::string> words_;
  std::size_t contexts_ = 0;
  std::size_t table_a_size_ = 0;
  std::vector<double> params_;
};

/// Year literal referenced by <Q0>: the first standalone four-digit number in
/// the question.
std::optional<std::string> question_year(std::string_view question);

}  // namespace sparqlrl
