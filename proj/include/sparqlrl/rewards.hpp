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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sparqlrl/answer_set.hpp"
#include "sparqlrl/corpus.hpp"
#include "sparqlrl/endpoint.hpp"
#include "sparqlrl/extraction.hpp"
#include "sparqlrl/tokenizer.hpp"

namespace sparqlrl {

class QueryCache;

enum class RewardComponent : std::uint8_t { Exec, Sim, Struct, Format, Len, LenRatio };

inline constexpr std::array<RewardComponent, 6> kAllRewardComponents = {
    RewardComponent::Exec,   RewardComponent::Sim, RewardComponent::Struct,
    RewardComponent::Format, RewardComponent::Len, RewardComponent::LenRatio,
};

/// "exec", "sim", "struct", "format", "len", "len_ratio".
std::string to_string(RewardComponent c);
RewardComponent reward_component_from_string(std::string_view name);

/// Components that need the gold query.
bool needs_gold_query(RewardComponent c);

struct RewardConfig {
  std::string name = "full-with-gold";
  std::array<double, 6> weights = {3.0, 2.0, 1.0, 0.5, 1.0, 1.0};
  std::array<bool, 6> enabled = {true, true, true, true, true, true};
  double exec_failure_penalty = -0.5;
  int len_target = 768;
  int len_max = 1024;
  double len_ratio_alpha = 2.0;
  double bleu_epsilon = 0.1;
  bool gold_available = true;

  double weight(RewardComponent c) const { return weights[static_cast<std::size_t>(c)]; }
  bool is_enabled(RewardComponent c) const { return enabled[static_cast<std::size_t>(c)]; }

  /// Throws std::invalid_argument when len_target >= len_max or a gold
  /// component is enabled without gold_available.
  void validate() const;

  /// Largest and smallest attainable totals.
  double max_total() const;
  double min_total() const;

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

/// Names of the shipped presets, in ablation order: exec, exec+format,
/// exec+format+struct, exec+format+struct+len, full-with-gold.
const std::vector<std::string>& reward_preset_names();
/// Throws std::invalid_argument for unknown names.
RewardConfig reward_preset(std::string_view name);

/// Unknown keys are rejected; missing keys keep their defaults.
RewardConfig reward_config_from_json(const nlohmann::json& j);
nlohmann::json reward_config_to_json(const RewardConfig& config);
RewardConfig load_reward_config(const std::filesystem::path& path);

/// Per-component scores. Disabled components are nullopt and do not enter
/// the total.
struct RewardBreakdown {
  std::array<std::optional<double>, 6> values;
  double total = 0.0;
  ExecutionStatus execution_status = ExecutionStatus::Ok;
  std::string query_text;

  std::optional<double> get(RewardComponent c) const {
    return values[static_cast<std::size_t>(c)];
  }
};

nlohmann::json reward_breakdown_to_json(const RewardBreakdown& b);

/// Set F1 over answer tuples (cells trimmed). Booleans and counts score 1
/// on equality, else 0. Kinds that differ score 0. Two empty binding sets
/// score 1.
double answer_f1(const AnswerSet& generated, const AnswerSet& gold);

double r_exec(const ExecutionOutcome& outcome, const AnswerSet& gold, double failure_penalty = -0.5);
double r_struct(std::string_view query_text, const std::vector<EntityHint>& entities,
                const std::vector<RelationHint>& relations);
double r_format(const Completion& completion);
double r_len(std::size_t token_count, int target, int max);
double r_sim(std::string_view generated_query, std::string_view gold_query, double epsilon = 0.1);
double r_len_ratio(std::size_t generated_tokens, std::size_t gold_tokens, double alpha);

struct ScoringContext {
  ExecutionBackend* backend = nullptr;
  QueryCache* cache = nullptr;
  Timeout timeout;
  /// Counts query tokens for the length-ratio reward; the query tokenizer
  /// when empty.
  TokenCounter count_tokens;
};

/// Extracts, executes and scores one completion. Throws
/// std::invalid_argument when the instance lacks gold answers, or lacks a
/// gold query while a gold component is enabled.
RewardBreakdown score_completion(const Completion& completion, const QAInstance& instance,
                                 const RewardConfig& config, const ScoringContext& context);

}  // namespace sparqlrl
