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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "sparqlrl/grpo.hpp"
#include "sparqlrl/toy_policy.hpp"

using namespace sparqlrl;

namespace {

QAInstance toy_instance(const std::string& id) {
  QAInstance inst;
  inst.id = id;
  inst.question = "Which papers did Ada Lovelace write?";
  inst.entities = {{"https://dblp.org/pid/00/1", "Ada Lovelace"}};
  inst.relations = {{"https://dblp.org/rdf/schema#authoredBy", "authored by", "", "", ""}};
  inst.gold_query = "SELECT ?x WHERE { ?x <https://dblp.org/rdf/schema#authoredBy> <https://dblp.org/pid/00/1> }";
  inst.query_type = QueryType::SingleFact;
  return inst;
}

ToyPolicy random_policy(std::uint64_t seed, double stddev) {
  ToyPolicy policy(ToyPolicyConfig{}, {"papers", "which", "write"});
  std::mt19937_64 rng(seed);
  policy.randomize(rng, stddev);
  return policy;
}

// Independent oracle: population standardization written out directly.
std::vector<double> oracle_advantages(const std::vector<double>& r, double eps) {
  double mean = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / r.size());
  std::vector<double> out;
  for (double x : r) out.push_back(sd + eps == 0.0 ? 0.0 : (x - mean) / (sd + eps));
  return out;
}

RewardBreakdown constant_reward(double total) {
  RewardBreakdown b;
  b.total = total;
  return b;
}

// Reward 1 when the completion contains "ASK", else 0.
RewardBreakdown ask_reward(const QAInstance&, const Completion& c) {
  return constant_reward(c.text.find("ASK") != std::string::npos ? 1.0 : 0.0);
}

}  // namespace

TEST(GroupAdvantages, Examples) {
  for (double a : group_advantages(std::vector{1.0, 1.0, 1.0, 1.0}, 1e-4)) EXPECT_EQ(a, 0.0);
  const auto adv = group_advantages(std::vector{0.0, 0.0, 0.0, 4.0}, 0.0);
  EXPECT_NEAR(adv[0], -1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(adv[3], 3.0 / std::sqrt(3.0), 1e-12);
  const auto shifted = group_advantages(std::vector{10.0, 10.0, 10.0, 14.0}, 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(shifted[i], adv[i], 1e-12);
  EXPECT_THROW(group_advantages(std::vector{1.0}, 1e-4), std::invalid_argument);
  // 0.1 * 3 / 3 != 0.1 in floating point.
  for (double a : group_advantages(std::vector{0.1, 0.1, 0.1}, 0.0)) EXPECT_EQ(a, 0.0);
}

TEST(GroupAdvantages, RandomizedProperties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> reward(-2.0, 9.0);
  std::uniform_int_distribution<int> size(2, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(static_cast<std::size_t>(size(rng)));
    for (double& x : r) x = reward(rng);
    const auto adv = group_advantages(r, 0.0);
    EXPECT_NEAR(std::accumulate(adv.begin(), adv.end(), 0.0), 0.0, 1e-9);
    const auto expected = oracle_advantages(r, 1e-4);
    const auto with_eps = group_advantages(r, 1e-4);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(with_eps[i], expected[i], 1e-9);
    const double a = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
    const double b = reward(rng);
    std::vector<double> t;
    for (double x : r) t.push_back(a * x + b);
    const auto adv_t = group_advantages(t, 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(adv_t[i], adv[i], 1e-9);
  }
}

TEST(ClippedTerm, Examples) {
  EXPECT_EQ(clipped_term(1.0, 0.7, 0.2).value, 0.7);
  EXPECT_NEAR(clipped_term(2.0, 1.0, 0.2).value, 1.2, 1e-15);
  EXPECT_TRUE(clipped_term(2.0, 1.0, 0.2).clipped);
  EXPECT_EQ(clipped_term(2.0, -1.0, 0.2).value, -2.0);
  EXPECT_FALSE(clipped_term(2.0, -1.0, 0.2).clipped);
  EXPECT_NEAR(clipped_term(0.5, -1.0, 0.2).value, -0.8, 1e-15);
  EXPECT_EQ(clipped_term(0.5, -1.0, 0.2).ratio_derivative, 0.0);
}

TEST(ClippedTerm, RandomizedAgainstDefinition) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ratio(0.01, 3.0), adv(-3.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const double r = ratio(rng), a = adv(rng);
    const auto t = clipped_term(r, a, 0.2);
    EXPECT_EQ(t.value, std::min(r * a, std::clamp(r, 0.8, 1.2) * a));
    if (r >= 0.8 && r <= 1.2) {
      EXPECT_EQ(t.value, r * a);
      EXPECT_FALSE(t.clipped);
    }
  }
}

TEST(GrpoGradient, MatchesFiniteDifferencesAwayFromRatioOne) {
  auto policy = random_policy(1, 0.5);
  auto old = random_policy(2, 0.5);
  const auto ref = random_policy(3, 0.5);
  GrpoConfig config;
  config.decoding.max_new_tokens = 12;
  const auto inst = toy_instance("a");
  const QAInstance* batch[] = {&inst};
  std::mt19937_64 rng(5);
  auto groups = sample_groups(batch, old, [](const QAInstance&, const Completion& c) {
    return constant_reward(static_cast<double>(c.text.size() % 7));
  }, config, rng);
  // The reused rollouts are scored under different parameters, so ratios
  // leave the trust region and both clip branches are exercised.
  std::vector<double> grad(policy.parameters().size(), 0.0);
  UpdateStats stats;
  add_grpo_gradient(groups, policy, ref, config, 1.0, grad, stats);
  ASSERT_EQ(stats.ratios.size(), 4u);

  auto objective = [&] {
    std::vector<double> none;
    UpdateStats s;
    return add_grpo_gradient(groups, policy, ref, config, 0.0, none, s);
  };
  auto params = policy.mutable_parameters();
  int checked = 0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (grad[i] == 0.0) continue;
    const double saved = params[i];
    params[i] = saved + 1e-6;
    const double up = objective();
    params[i] = saved - 1e-6;
    const double down = objective();
    params[i] = saved;
    const double numeric = (up - down) / 2e-6;
    EXPECT_LE(std::abs(grad[i] - numeric) / std::max({std::abs(grad[i]), std::abs(numeric), 1e-5}), 1e-4)
        << i;
    if (++checked == 80) break;
  }
  EXPECT_GT(checked, 20);
  int recount = 0;
  for (std::size_t k = 0; k < stats.ratios.size(); ++k) {
    recount += clipped_term(stats.ratios[k], stats.advantages[k], config.clip_epsilon).clipped;
  }
  EXPECT_DOUBLE_EQ(stats.clip_fraction, recount / 4.0);
}

TEST(GrpoTrainer, EqualRewardsAndNoKlLeaveParametersUnchanged) {
  auto policy = random_policy(6, 0.5);
  const std::vector<double> before(policy.parameters().begin(), policy.parameters().end());
  GrpoConfig config;
  config.kl_beta = 0.0;
  config.grad_accum = 1;
  config.decoding.max_new_tokens = 10;
  GrpoTrainer trainer(policy, policy.clone(),
                      [](const QAInstance&, const Completion&) { return constant_reward(1.0); }, config);
  const auto inst = toy_instance("a");
  const QAInstance* batch[] = {&inst, &inst};
  const auto stats = trainer.step(batch);
  EXPECT_TRUE(stats.optimizer_stepped);
  EXPECT_EQ(stats.grad_norm, 0.0);
  EXPECT_TRUE(std::equal(before.begin(), before.end(), policy.parameters().begin()));
}

TEST(GrpoTrainer, EqualRewardsAtInitHaveZeroGradient) {
  auto policy = random_policy(7, 0.5);
  GrpoConfig config;
  config.decoding.max_new_tokens = 10;
  GrpoTrainer trainer(policy, policy.clone(),
                      [](const QAInstance&, const Completion&) { return constant_reward(0.5); }, config);
  const auto inst = toy_instance("a");
  const QAInstance* batch[] = {&inst};
  const auto stats = trainer.step(batch);
  EXPECT_EQ(stats.kl, 0.0);
  EXPECT_NEAR(stats.grad_norm, 0.0, 1e-12);
  EXPECT_FALSE(stats.optimizer_stepped);
}

TEST(GrpoTrainer, RewardFailureBecomesPenaltyTotal) {
  auto policy = random_policy(8, 0.5);
  GrpoConfig config;
  config.grad_accum = 1;
  config.decoding.max_new_tokens = 10;
  GrpoTrainer trainer(policy, policy.clone(),
                      [](const QAInstance&, const Completion&) -> RewardBreakdown {
                        throw std::runtime_error("backend down");
                      },
                      config);
  const auto inst = toy_instance("a");
  const QAInstance* batch[] = {&inst};
  const auto stats = trainer.step(batch);
  EXPECT_EQ(stats.mean_reward, -1.5);
  EXPECT_EQ(stats.mean_abs_advantage, 0.0);
}

TEST(GrpoTrainer, RaisesProbabilityOfRewardedQuery) {
  ToyPolicy policy(ToyPolicyConfig{}, {"papers", "which", "write"});
  GrpoConfig config;
  config.grad_accum = 1;
  config.decoding.max_new_tokens = 8;
  config.decoding.temperature = 1.0;
  config.decoding.top_p = 1.0;
  config.decoding.top_k = 0;
  GrpoTrainer trainer(policy, policy.clone(), ask_reward, config);
  const auto inst = toy_instance("a");
  const QAInstance* batch[] = {&inst};
  const auto encoded = policy.encode(make_policy_prompt(inst, true));
  const int ask = ToyPolicy::token_id("ASK");
  auto p_ask = [&] { return token_distribution(policy, encoded, {})[static_cast<std::size_t>(ask)]; };
  std::vector<double> trace = {p_ask()};
  for (int i = 0; i < 100; ++i) {
    trainer.step(batch);
    trace.push_back(p_ask());
  }
  EXPECT_GT(trace.back(), 0.8);
  EXPECT_GT(trace.back(), trace.front() + 0.5);
  // Mostly increasing: compare 10-step block means.
  for (int b = 1; b < 10; ++b) {
    const double prev = std::accumulate(trace.begin() + (b - 1) * 10, trace.begin() + b * 10, 0.0);
    const double cur = std::accumulate(trace.begin() + b * 10, trace.begin() + (b + 1) * 10, 0.0);
    EXPECT_GE(cur, prev - 1e-9) << b;
  }
}

TEST(GrpoTrainer, AccumulationAndOldPolicyRefresh) {
  auto policy = random_policy(9, 0.5);
  GrpoConfig config;
  config.grad_accum = 3;
  config.decoding.max_new_tokens = 8;
  GrpoTrainer trainer(policy, policy.clone(), ask_reward, config);
  const auto inst = toy_instance("a");
  const QAInstance* batch[] = {&inst};
  for (int i = 1; i <= 6; ++i) {
    const auto stats = trainer.step(batch);
    EXPECT_EQ(stats.optimizer_stepped, i % 3 == 0);
    EXPECT_EQ(stats.optimizer_step, i / 3);
    for (double r : stats.ratios) EXPECT_NEAR(r, 1.0, 1e-12);
    if (i % 3 == 0) {
      EXPECT_TRUE(trainer.at_boundary());
      EXPECT_TRUE(std::equal(policy.parameters().begin(), policy.parameters().end(),
                             trainer.old_policy().parameters().begin()));
    }
  }
}

TEST(GrpoTrainer, ReuseIterationsProduceRatiosAwayFromOne) {
  auto policy = random_policy(10, 0.5);
  GrpoConfig config;
  config.grad_accum = 1;
  config.iterations_per_batch = 3;
  config.decoding.max_new_tokens = 8;
  config.optimizer.learning_rate = 0.05;
  GrpoTrainer trainer(policy, policy.clone(), ask_reward, config);
  const auto inst = toy_instance("a");
  const QAInstance* batch[] = {&inst, &inst, &inst};
  std::int64_t steps = 0;
  for (int i = 0; i < 5; ++i) steps = trainer.step(batch).optimizer_step;
  EXPECT_EQ(steps, 15);
}

TEST(GrpoTrainer, StateRoundTripReproducesTrajectory) {
  const auto inst = toy_instance("a");
  const QAInstance* batch[] = {&inst};
  GrpoConfig config;
  config.grad_accum = 2;
  config.decoding.max_new_tokens = 8;

  auto a = random_policy(11, 0.5);
  const auto ref = a.clone();
  GrpoTrainer ta(a, ref->clone(), ask_reward, config);
  for (int i = 0; i < 4; ++i) ta.step(batch);
  const auto state = ta.state_to_json();
  const auto params = a.to_json();
  for (int i = 0; i < 4; ++i) ta.step(batch);

  auto b = ToyPolicy::from_json(params);
  GrpoTrainer tb(b, ref->clone(), ask_reward, config);
  tb.load_state(state);
  for (int i = 0; i < 4; ++i) tb.step(batch);
  EXPECT_EQ(tb.micro_steps(), 8);
  EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
}

TEST(GrpoConfig, JsonRoundTripAndValidation) {
  GrpoConfig c;
  c.kl_beta = 0.1;
  c.decoding.top_k = 5;
  const auto back = grpo_config_from_json(grpo_config_to_json(c));
  EXPECT_EQ(grpo_config_to_json(back), grpo_config_to_json(c));
  EXPECT_THROW(grpo_config_from_json({{"betta", 1}}), std::invalid_argument);
  c.clip_epsilon = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = GrpoConfig{};
  c.group_size = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Supervised, ObjectiveIsMeanTokenLogLikelihoodAndIncreases) {
  ToyPolicy policy(ToyPolicyConfig{}, {"papers", "which", "write"});
  const auto inst = toy_instance("a");
  const auto ex = make_supervised_example(policy, inst);
  EXPECT_EQ(ex.tokens.size(), 9u);
  SupervisedConfig config;
  config.batch_size = 1;
  config.grad_accum = 1;
  config.optimizer.learning_rate = 1e-2;
  config.optimizer.linear_schedule = false;
  SupervisedTrainer trainer(policy, config);
  const std::vector<SupervisedExample> batch = {ex};
  const double initial = log_prob(policy, ex.encoded, ex.tokens) / ex.tokens.size();
  double previous = -1e300;
  for (int i = 0; i < 50; ++i) {
    const auto stats = trainer.step(batch);
    if (i == 0) {
      EXPECT_NEAR(stats.objective, initial, 1e-12);
    }
    EXPECT_GT(stats.objective, previous);
    previous = stats.objective;
  }
  EXPECT_GT(previous, -0.5);
}

TEST(Supervised, MissingOrOutOfVocabularyGold) {
  ToyPolicy policy(ToyPolicyConfig{}, {});
  auto inst = toy_instance("a");
  inst.gold_query = "SELECT ?x WHERE { ?x <https://other> ?y }";
  EXPECT_THROW(make_supervised_example(policy, inst), OutOfVocabulary);
  inst.gold_query.reset();
  EXPECT_THROW(make_supervised_example(policy, inst), std::invalid_argument);
}

TEST(AdamW, FirstStepMovesEachCoordinateByLearningRate) {
  AdamW opt(3, AdamWConfig{});
  std::vector<double> p = {0.0, 1.0, 2.0};
  const std::vector<double> g = {0.5, -2.0, 0.0};
  opt.ascend(p, g, 0.1);
  EXPECT_NEAR(p[0], 0.1, 1e-8);
  EXPECT_NEAR(p[1], 0.9, 1e-8);
  EXPECT_EQ(p[2], 2.0);
  EXPECT_DOUBLE_EQ(scheduled_learning_rate({0.1, 0.9, 0.999, 1e-8, 0.0, true}, 5, 10), 0.05);
  EXPECT_DOUBLE_EQ(scheduled_learning_rate({0.1, 0.9, 0.999, 1e-8, 0.0, false}, 5, 10), 0.1);
}

TEST(Gradient, NonFiniteAborts) {
  const std::vector<double> g = {0.0, std::nan("")};
  EXPECT_THROW(check_finite_gradient(g, "test"), std::runtime_error);
}
