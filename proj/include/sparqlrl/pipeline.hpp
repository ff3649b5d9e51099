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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sparqlrl/corpus.hpp"
#include "sparqlrl/endpoint.hpp"
#include "sparqlrl/evaluation.hpp"
#include "sparqlrl/policy.hpp"
#include "sparqlrl/query_cache.hpp"
#include "sparqlrl/rewards.hpp"

namespace sparqlrl {

/// Environment variable that replaces the remote endpoint URL.
inline constexpr const char* kEndpointEnv = "SPARQLRL_ENDPOINT";

struct BackendSpec {
  std::optional<std::filesystem::path> store;
  std::optional<std::string> endpoint;
};

/// Applies the endpoint override from the environment and checks that
/// exactly one backend is selected. Throws std::invalid_argument.
BackendSpec resolve_backend(BackendSpec spec, const char* env_endpoint);

/// Loads the store or connects to the endpoint (without probing it).
std::unique_ptr<ExecutionBackend> make_backend(const BackendSpec& spec);

struct PreparedSplit {
  std::vector<QAInstance> instances;
  /// Instances whose gold query failed to execute; not in `instances`.
  std::vector<QAInstance> dropped;
};

/// Reads `<dir>/<split>.jsonl` and materializes the instances that lack
/// gold answers.
PreparedSplit prepare_split(const std::filesystem::path& dir, Split split,
                            ExecutionBackend& backend, QueryCache* cache, unsigned threads = 1,
                            Timeout timeout = std::nullopt);

/// The named preset with the length targets of `base`.
RewardConfig apply_preset(const RewardConfig& base, std::string_view preset);

/// Throws std::invalid_argument naming the first instance without a gold
/// query when the config needs one.
void check_gold_queries(const RewardConfig& config, const std::vector<QAInstance>& instances);

struct PolicyEvaluation {
  std::vector<std::string> completions;
  std::vector<InstanceResult> results;
  EvalReport report;
};

PolicyEvaluation evaluate_policy(const Policy& policy, const std::vector<QAInstance>& instances,
                                 ExecutionBackend& backend, QueryCache* cache, bool cot,
                                 int max_new_tokens, unsigned threads = 1,
                                 Timeout timeout = std::nullopt);

PolicyEvaluation evaluate_completions(const std::vector<QAInstance>& instances,
                                      std::vector<std::string> completions,
                                      ExecutionBackend& backend, QueryCache* cache,
                                      unsigned threads = 1, Timeout timeout = std::nullopt);

struct AblationEntry {
  std::string preset;
  /// Preset name, suffixed with "#k" for the k-th repeat (k >= 2).
  std::string label;
  /// Added to the base seed; k-1 for the k-th occurrence of a preset.
  std::uint64_t seed_offset = 0;
};

/// Throws std::invalid_argument for an empty list or unknown preset names.
std::vector<AblationEntry> plan_ablation(const std::vector<std::string>& presets);

/// File-name-safe form of a label ('+' and '#' kept, other non-alphanumerics
/// replaced by '_').
std::string file_label(std::string_view label);

}  // namespace sparqlrl
