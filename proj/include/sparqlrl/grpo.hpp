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
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparqlrl/corpus.hpp"
#include "sparqlrl/extraction.hpp"
#include "sparqlrl/optimizer.hpp"
#include "sparqlrl/policy.hpp"
#include "sparqlrl/rewards.hpp"

namespace sparqlrl {

/// (R_i - mean) / (population std + eps_std). Throws for fewer than two
/// rewards.
std::vector<double> group_advantages(std::span<const double> rewards, double eps_std);

struct ClippedTerm {
  double value = 0.0;
  /// d value / d ratio.
  double ratio_derivative = 0.0;
  /// The clipped branch is strictly smaller than the unclipped one.
  bool clipped = false;
};

/// min(r A, clip(r, 1 - eps, 1 + eps) A).
ClippedTerm clipped_term(double ratio, double advantage, double eps);

struct GrpoConfig {
  int group_size = 4;
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  double eps_std = 1e-4;
  /// Prompts per micro-batch.
  int batch_size = 4;
  int grad_accum = 16;
  /// Optimizer steps on the same rollouts before the old policy is refreshed.
  int iterations_per_batch = 1;
  AdamWConfig optimizer{1e-2, 0.9, 0.999, 1e-8, 0.0, true};
  DecodingConfig decoding;
  bool cot = true;
  std::uint64_t seed = 42;
  /// Reward total assigned when the reward function throws.
  double reward_failure_total = -1.5;
  /// Worker threads for rollout sampling and scoring.
  unsigned threads = 1;

  void validate() const;
};

nlohmann::json grpo_config_to_json(const GrpoConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
GrpoConfig grpo_config_from_json(const nlohmann::json& j);
nlohmann::json decoding_config_to_json(const DecodingConfig& c);
DecodingConfig decoding_config_from_json(const nlohmann::json& j);

using RewardFn = std::function<RewardBreakdown(const QAInstance&, const Completion&)>;

struct Rollout {
  std::vector<int> tokens;
  std::string text;
  /// Untempered log-probability under the sampling (old) policy.
  double old_log_prob = 0.0;
  bool truncated = false;
  RewardBreakdown reward;
  double advantage = 0.0;
};

struct RolloutGroup {
  std::string prompt_id;
  EncodedPrompt encoded;
  std::vector<Rollout> rollouts;
};

struct UpdateStats {
  /// Micro-batches processed so far, this one included.
  std::int64_t step = 0;
  /// Optimizer steps taken so far.
  std::int64_t optimizer_step = 0;
  /// This micro-batch completed an accumulation window.
  bool optimizer_stepped = false;
  double learning_rate = 0.0;
  double mean_reward = 0.0;
  double reward_std = 0.0;
  double mean_abs_advantage = 0.0;
  double clip_fraction = 0.0;
  double kl = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double mean_length = 0.0;
  double truncated_fraction = 0.0;
  /// Mean of each reward component over the rollouts that carry it.
  std::vector<std::pair<std::string, double>> component_means;
  std::vector<double> ratios;
  std::vector<double> advantages;
};

nlohmann::json update_stats_to_json(const UpdateStats& s);

/// Samples G rollouts per prompt from `old_policy`, scores them and fills in
/// advantages. Each prompt draws from its own generator seeded from `rng`,
/// so results do not depend on the thread count.
std::vector<RolloutGroup> sample_groups(std::span<const QAInstance* const> batch,
                                        const Policy& old_policy, const RewardFn& reward_fn,
                                        const GrpoConfig& config, std::mt19937_64& rng);

/// Adds scale * d J / d theta to grad, where J is the mean over all rollouts
/// of clipped_term(pi_theta / pi_old, A) - beta * sequence_kl(pi_theta, pi_ref),
/// and returns J. Ratios, advantages, KL and clip counts land in `stats`.
double add_grpo_gradient(const std::vector<RolloutGroup>& groups, const Policy& policy,
                         const Policy& ref, const GrpoConfig& config, double scale,
                         std::span<double> grad, UpdateStats& stats);

/// GRPO with a frozen reference and a periodically refreshed old policy.
///
/// Every call to step() consumes one micro-batch. After grad_accum
/// micro-batches the accumulated gradient is applied, followed by
/// iterations_per_batch - 1 further steps on the stored rollouts; the old
/// policy is then refreshed from the current parameters.
class GrpoTrainer {
 public:
  GrpoTrainer(Policy& policy, std::unique_ptr<Policy> ref, RewardFn reward_fn, GrpoConfig config,
              std::int64_t planned_optimizer_steps = 0);

  UpdateStats step(std::span<const QAInstance* const> batch);

  const GrpoConfig& config() const { return config_; }
  const Policy& reference() const { return *ref_; }
  const Policy& old_policy() const { return *old_; }
  std::int64_t micro_steps() const { return micro_steps_; }
  std::int64_t optimizer_steps() const { return optimizer_.steps(); }
  /// True between accumulation windows, where a checkpoint is complete.
  bool at_boundary() const { return pending_.empty(); }

  /// Optimizer, counters and RNG state; valid only at a boundary.
  nlohmann::json state_to_json() const;
  void load_state(const nlohmann::json& j);

 private:
  void apply(std::span<const double> grad, UpdateStats& stats);

  Policy& policy_;
  std::unique_ptr<Policy> ref_;
  std::unique_ptr<Policy> old_;
  RewardFn reward_fn_;
  GrpoConfig config_;
  std::int64_t planned_steps_;
  AdamW optimizer_;
  std::mt19937_64 rng_;
  std::int64_t micro_steps_ = 0;
  std::vector<double> accumulated_;
  std::vector<std::vector<RolloutGroup>> pending_;
};

struct SupervisedConfig {
  int batch_size = 8;
  int grad_accum = 8;
  AdamWConfig optimizer{2e-5, 0.9, 0.999, 1e-8, 0.0, true};
  std::uint64_t seed = 42;

  void validate() const;
};

nlohmann::json supervised_config_to_json(const SupervisedConfig& c);
SupervisedConfig supervised_config_from_json(const nlohmann::json& j);

/// A target sequence under an already encoded prompt.
struct SupervisedExample {
  std::string id;
  EncodedPrompt encoded;
  std::vector<int> tokens;
};

/// Gold query of `instance` as a training example (CoT disabled). Throws
/// OutOfVocabulary or std::invalid_argument when the gold query is missing.
SupervisedExample make_supervised_example(const Policy& policy, const QAInstance& instance);

/// Adds scale * d L / d theta to grad, where L is the mean per-token
/// log-likelihood over all target tokens of the batch, and returns L.
double add_supervised_gradient(std::span<const SupervisedExample> batch, const Policy& policy,
                               double scale, std::span<double> grad);

/// Cross-entropy ascent with gradient accumulation. The reported objective
/// is the mean per-token log-likelihood before the update.
class SupervisedTrainer {
 public:
  SupervisedTrainer(Policy& policy, SupervisedConfig config, std::int64_t planned_optimizer_steps = 0);

  UpdateStats step(std::span<const SupervisedExample> batch);

  std::int64_t micro_steps() const { return micro_steps_; }
  std::int64_t optimizer_steps() const { return optimizer_.steps(); }
  bool at_boundary() const { return pending_ == 0; }

  nlohmann::json state_to_json() const;
  void load_state(const nlohmann::json& j);

 private:
  Policy& policy_;
  SupervisedConfig config_;
  std::int64_t planned_steps_;
  AdamW optimizer_;
  std::int64_t micro_steps_ = 0;
  int pending_ = 0;
  std::vector<double> accumulated_;
};

/// Throws std::runtime_error naming the first non-finite entry.
void check_finite_gradient(std::span<const double> grad, std::string_view context);

double l2_norm(std::span<const double> v);

}  // namespace sparqlrl
