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

#include "sparqlrl/pipeline.hpp"

#include <cctype>
#include <map>
#include <stdexcept>

#include "sparqlrl/parallel.hpp"
#include "sparqlrl/sparql/triple_store.hpp"
#include "sparqlrl/training.hpp"

namespace sparqlrl {

namespace fs = std::filesystem;

BackendSpec resolve_backend(BackendSpec spec, const char* env_endpoint) {
  if (env_endpoint != nullptr && *env_endpoint != '\0' && !spec.store) {
    spec.endpoint = std::string(env_endpoint);
  }
  if (spec.store.has_value() == spec.endpoint.has_value()) {
    throw std::invalid_argument("select exactly one backend: --store or --endpoint");
  }
  if (spec.store && !fs::is_regular_file(*spec.store)) {
    throw std::invalid_argument("store file " + spec.store->string() + " does not exist");
  }
  return spec;
}

std::unique_ptr<ExecutionBackend> make_backend(const BackendSpec& spec) {
  if (spec.store) {
    auto store = std::make_shared<const sparql::TripleStore>(sparql::load_triples(*spec.store));
    return std::make_unique<EmbeddedBackend>(std::move(store));
  }
  return std::make_unique<RemoteBackend>(spec.endpoint.value());
}

PreparedSplit prepare_split(const fs::path& dir, Split split, ExecutionBackend& backend,
                            QueryCache* cache, unsigned threads, Timeout timeout) {
  auto instances = load_dataset(dir, split);
  std::vector<QAInstance> pending;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!instances[i].gold_answers && !instances[i].materialization_error) {
      pending.push_back(instances[i]);
      where.push_back(i);
    }
  }
  if (!pending.empty()) {
    auto done = materialize_gold_answers(std::move(pending), backend, cache, threads, timeout);
    for (std::size_t k = 0; k < done.size(); ++k) instances[where[k]] = std::move(done[k]);
  }
  PreparedSplit out;
  for (auto& inst : instances) (inst.usable() ? out.instances : out.dropped).push_back(std::move(inst));
  return out;
}

RewardConfig apply_preset(const RewardConfig& base, std::string_view preset) {
  RewardConfig config = reward_preset(preset);
  config.len_target = base.len_target;
  config.len_max = base.len_max;
  config.len_ratio_alpha = base.len_ratio_alpha;
  config.bleu_epsilon = base.bleu_epsilon;
  config.exec_failure_penalty = base.exec_failure_penalty;
  config.weights = base.weights;
  return config;
}

void check_gold_queries(const RewardConfig& config, const std::vector<QAInstance>& instances) {
  bool needed = false;
  for (auto c : kAllRewardComponents) needed |= config.is_enabled(c) && needs_gold_query(c);
  if (!needed) return;
  for (const auto& inst : instances) {
    if (!inst.gold_query) {
      throw std::invalid_argument("reward '" + config.name + "' needs gold queries but instance " +
                                  inst.id + " has none");
    }
  }
}

PolicyEvaluation evaluate_policy(const Policy& policy, const std::vector<QAInstance>& instances,
                                 ExecutionBackend& backend, QueryCache* cache, bool cot,
                                 int max_new_tokens, unsigned threads, Timeout timeout) {
  return evaluate_completions(instances,
                              greedy_completions(policy, instances, cot, max_new_tokens, threads),
                              backend, cache, threads, timeout);
}

PolicyEvaluation evaluate_completions(const std::vector<QAInstance>& instances,
                                      std::vector<std::string> completions,
                                      ExecutionBackend& backend, QueryCache* cache,
                                      unsigned threads, Timeout timeout) {
  PolicyEvaluation out;
  out.results = evaluate_run(instances, completions, backend, cache, timeout, threads);
  out.report = aggregate(out.results);
  out.completions = std::move(completions);
  return out;
}

std::vector<AblationEntry> plan_ablation(const std::vector<std::string>& presets) {
  if (presets.empty()) throw std::invalid_argument("ablation needs at least one preset");
  std::map<std::string, std::uint64_t> seen;
  std::vector<AblationEntry> out;
  for (const auto& p : presets) {
    reward_preset(p);
    const std::uint64_t k = ++seen[p];
    out.push_back({p, k == 1 ? p : p + "#" + std::to_string(k), k - 1});
  }
  return out;
}

std::string file_label(std::string_view label) {
  std::string out;
  for (unsigned char c : label) {
    out.push_back(std::isalnum(c) || c == '+' || c == '#' || c == '-' || c == '.' ? static_cast<char>(c) : '_');
  }
  return out;
}

}  // namespace sparqlrl
