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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparqlrl/corpus.hpp"
#include "sparqlrl/endpoint.hpp"
#include "sparqlrl/grpo.hpp"
#include "sparqlrl/query_cache.hpp"
#include "sparqlrl/rewards.hpp"
#include "sparqlrl/toy_policy.hpp"

namespace sparqlrl {

/// Pretraining of the toy policy on generic question/skeleton pairs. The
/// result plays the part of the untuned base model.
struct PriorConfig {
  int epochs = 3;
  int batch_size = 16;
  double learning_rate = 1e-2;
  std::uint64_t seed = 42;

  void validate() const;
};

nlohmann::json prior_config_to_json(const PriorConfig& c);
PriorConfig prior_config_from_json(const nlohmann::json& j);

struct PriorExample {
  std::string question;
  std::vector<int> tokens;
};

/// Non-empty lines of a prior file: "question<TAB>pointer line", or a bare
/// pointer line with an empty question.
std::vector<PriorExample> read_prior_file(const ToyPolicy& policy,
                                          const std::filesystem::path& path);

/// Prompt for a prior example, with as many placeholder hints as the
/// highest entity and relation pointer in the tokens requires.
PolicyPrompt prior_prompt(const PriorExample& example);

/// Mean per-token log-likelihood of the examples after pretraining.
double pretrain_prior(ToyPolicy& policy, const std::vector<PriorExample>& examples,
                      const PriorConfig& config);

/// Question-word vocabulary from `train`, then pretraining on the prior file.
ToyPolicy make_initial_policy(const std::vector<QAInstance>& train,
                              const std::filesystem::path& prior_file, const PriorConfig& config,
                              ToyPolicyConfig policy_config = {});

/// score_completion bound to a backend, cache and config.
RewardFn make_reward_fn(RewardConfig config, ExecutionBackend& backend, QueryCache* cache,
                        Timeout timeout = std::nullopt);

/// Greedy decodes, one completion text per instance.
std::vector<std::string> greedy_completions(const Policy& policy,
                                            const std::vector<QAInstance>& instances, bool cot,
                                            int max_new_tokens, unsigned threads = 1);

enum class TrainMode { Grpo, Supervised };
std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(std::string_view text);

struct TrainOptions {
  TrainMode mode = TrainMode::Grpo;
  GrpoConfig grpo;
  SupervisedConfig supervised;
  RewardConfig reward;
  int epochs = 1;
  /// Stop after this many optimizer steps; 0 for no limit.
  std::int64_t max_optimizer_steps = 0;
  /// Checkpoint period in optimizer steps; 0 disables periodic checkpoints.
  std::int64_t checkpoint_every = 0;

  void validate() const;
};

nlohmann::json train_options_to_json(const TrainOptions& o);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainOptions train_options_from_json(const nlohmann::json& j);

/// Optimizer steps the options will take over `train_size` instances.
std::int64_t planned_optimizer_steps(const TrainOptions& options, std::size_t train_size);

struct TrainResult {
  std::int64_t micro_steps = 0;
  std::int64_t optimizer_steps = 0;
  std::optional<UpdateStats> last;
};

/// Called after every micro-batch.
using StepCallback = std::function<void(const UpdateStats&)>;

/// Training run directory:
///   config.json       options snapshot plus `extra`
///   reference.json    policy at the start (KL reference)
///   stats.jsonl       one UpdateStats object per micro-batch
///   checkpoint.json   latest policy + trainer state
///   checkpoints/      policy-<step>.json every checkpoint_every steps
///   policy.json       final policy
class TrainingRun {
 public:
  /// Creates the directory. Throws std::invalid_argument if it already holds
  /// a run.
  static TrainingRun create(const std::filesystem::path& dir, const TrainOptions& options,
                            const ToyPolicy& initial, const nlohmann::json& extra = {});
  /// Reopens a run for resumption from its last checkpoint.
  static TrainingRun open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const TrainOptions& options() const { return options_; }

  /// Trains to completion (epochs or max_optimizer_steps), resuming from the
  /// checkpoint when one exists. `train` must match the original run.
  TrainResult train(const std::vector<QAInstance>& train, const RewardFn& reward_fn,
                    const StepCallback& on_step = {});

  /// Policy after train() (or the checkpointed one).
  const ToyPolicy& policy() const { return policy_; }

 private:
  TrainingRun(std::filesystem::path dir, TrainOptions options, ToyPolicy policy, ToyPolicy reference);

  void write_checkpoint(const nlohmann::json& trainer_state, std::optional<std::int64_t> numbered);

  std::filesystem::path dir_;
  TrainOptions options_;
  ToyPolicy policy_;
  ToyPolicy reference_;
};

/// Writes `text` to `path` through a temporary file.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace sparqlrl
