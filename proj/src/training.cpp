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

#include "sparqlrl/training.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sparqlrl/parallel.hpp"

namespace sparqlrl {

namespace fs = std::filesystem;

namespace {

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::int64_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(epoch + 1));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

// Keeps the stats lines of micro-batches up to `last_step`.
void truncate_stats(const fs::path& path, std::int64_t last_step) {
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  std::string kept, line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (nlohmann::json::parse(line).at("step").get<std::int64_t>() <= last_step) kept += line + "\n";
  }
  in.close();
  write_file_atomic(path, kept);
}

}  // namespace

void PriorConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("prior epochs must be non-negative");
  if (batch_size < 1) throw std::invalid_argument("prior batch_size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("prior learning_rate must be positive");
}

nlohmann::json prior_config_to_json(const PriorConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed}};
}

PriorConfig prior_config_from_json(const nlohmann::json& j) {
  PriorConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key != "epochs" && key != "batch_size" && key != "learning_rate" && key != "seed") {
      throw std::invalid_argument("unknown prior config key '" + key + "'");
    }
  }
  read_if(j, "epochs", c.epochs);
  read_if(j, "batch_size", c.batch_size);
  read_if(j, "learning_rate", c.learning_rate);
  read_if(j, "seed", c.seed);
  return c;
}

std::vector<PriorExample> read_prior_file(const ToyPolicy& policy, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open prior file " + path.string());
  std::vector<PriorExample> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PriorExample example;
    std::string_view skeleton = line;
    if (const auto tab = line.find('\t'); tab != std::string::npos) {
      example.question = line.substr(0, tab);
      skeleton = std::string_view(line).substr(tab + 1);
    }
    try {
      example.tokens = policy.tokenize_pointer_line(skeleton);
    } catch (const OutOfVocabulary& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
    out.push_back(std::move(example));
  }
  if (out.empty()) throw std::invalid_argument("prior file " + path.string() + " is empty");
  return out;
}

PolicyPrompt prior_prompt(const PriorExample& example) {
  const auto& vocab = ToyPolicy::vocabulary();
  std::size_t entities = 0;
  std::size_t relations = 0;
  for (int t : example.tokens) {
    const std::string& name = vocab.at(static_cast<std::size_t>(t));
    if (name.size() == 4 && name[0] == '<' && name[3] == '>') {
      const auto index = static_cast<std::size_t>(name[2] - '0') + 1;
      if (name[1] == 'E') entities = std::max(entities, index);
      if (name[1] == 'R') relations = std::max(relations, index);
    }
  }
  PolicyPrompt prompt;
  prompt.question = example.question;
  prompt.entities.resize(entities);
  prompt.relations.resize(relations);
  prompt.cot = true;
  return prompt;
}

double pretrain_prior(ToyPolicy& policy, const std::vector<PriorExample>& prior,
                      const PriorConfig& config) {
  config.validate();
  std::vector<SupervisedExample> examples;
  for (const auto& p : prior) {
    const EncodedPrompt encoded = policy.encode(prior_prompt(p));
    for (int t : p.tokens) {
      if (!encoded.allowed[static_cast<std::size_t>(t)]) {
        throw std::invalid_argument("prior example '" + p.question + "' uses " +
                                    policy.token_name(t) + " without a referent");
      }
    }
    examples.push_back({"", encoded, p.tokens});
  }
  SupervisedConfig sc;
  sc.batch_size = config.batch_size;
  sc.grad_accum = 1;
  sc.optimizer = AdamWConfig{config.learning_rate, 0.9, 0.999, 1e-8, 0.0, false};
  SupervisedTrainer trainer(policy, sc);
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(examples.size(), config.seed, epoch);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      std::vector<SupervisedExample> batch;
      for (std::size_t k = start; k < std::min(order.size(), start + bs); ++k) {
        batch.push_back(examples[order[k]]);
      }
      trainer.step(batch);
    }
  }
  std::vector<double> unused;
  return add_supervised_gradient(examples, policy, 0.0, unused);
}

ToyPolicy make_initial_policy(const std::vector<QAInstance>& train, const fs::path& prior_file,
                              const PriorConfig& config, ToyPolicyConfig policy_config) {
  ToyPolicy policy(policy_config, ToyPolicy::fit_words(train));
  pretrain_prior(policy, read_prior_file(policy, prior_file), config);
  return policy;
}

RewardFn make_reward_fn(RewardConfig config, ExecutionBackend& backend, QueryCache* cache,
                        Timeout timeout) {
  config.validate();
  ScoringContext context{&backend, cache, timeout, {}};
  return [config = std::move(config), context](const QAInstance& instance, const Completion& c) {
    return score_completion(c, instance, config, context);
  };
}

std::vector<std::string> greedy_completions(const Policy& policy,
                                            const std::vector<QAInstance>& instances, bool cot,
                                            int max_new_tokens, unsigned threads) {
  const DecodingConfig greedy{0.0, 1.0, 0, max_new_tokens};
  std::vector<std::string> out(instances.size());
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    const PolicyPrompt prompt = make_policy_prompt(instances[i], cot);
    std::mt19937_64 unused(0);
    out[i] = policy.detokenize(prompt, sample(policy, policy.encode(prompt), greedy, unused).tokens);
  });
  return out;
}

std::string to_string(TrainMode mode) { return mode == TrainMode::Grpo ? "grpo" : "supervised"; }

TrainMode train_mode_from_string(std::string_view text) {
  if (text == "grpo") return TrainMode::Grpo;
  if (text == "supervised") return TrainMode::Supervised;
  throw std::invalid_argument("unknown training mode '" + std::string(text) + "'");
}

void TrainOptions::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (max_optimizer_steps < 0) throw std::invalid_argument("max_optimizer_steps must be non-negative");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be non-negative");
  if (mode == TrainMode::Grpo) {
    grpo.validate();
    reward.validate();
  } else {
    supervised.validate();
  }
}

nlohmann::json train_options_to_json(const TrainOptions& o) {
  return {{"mode", to_string(o.mode)},
          {"grpo", grpo_config_to_json(o.grpo)},
          {"supervised", supervised_config_to_json(o.supervised)},
          {"reward", reward_config_to_json(o.reward)},
          {"epochs", o.epochs},
          {"max_optimizer_steps", o.max_optimizer_steps},
          {"checkpoint_every", o.checkpoint_every}};
}

TrainOptions train_options_from_json(const nlohmann::json& j) {
  TrainOptions o;
  for (const auto& [key, value] : j.items()) {
    if (key == "mode") {
      o.mode = train_mode_from_string(value.get<std::string>());
    } else if (key == "grpo") {
      o.grpo = grpo_config_from_json(value);
    } else if (key == "supervised") {
      o.supervised = supervised_config_from_json(value);
    } else if (key == "reward") {
      o.reward = reward_config_from_json(value);
    } else if (key == "epochs") {
      o.epochs = value.get<int>();
    } else if (key == "max_optimizer_steps") {
      o.max_optimizer_steps = value.get<std::int64_t>();
    } else if (key == "checkpoint_every") {
      o.checkpoint_every = value.get<std::int64_t>();
    } else {
      throw std::invalid_argument("unknown training option '" + key + "'");
    }
  }
  return o;
}

namespace {

std::size_t batch_size_of(const TrainOptions& o) {
  return static_cast<std::size_t>(o.mode == TrainMode::Grpo ? o.grpo.batch_size
                                                            : o.supervised.batch_size);
}

std::int64_t accum_of(const TrainOptions& o) {
  return o.mode == TrainMode::Grpo ? o.grpo.grad_accum : o.supervised.grad_accum;
}

std::int64_t batches_per_epoch(const TrainOptions& o, std::size_t n) {
  const std::size_t bs = batch_size_of(o);
  return static_cast<std::int64_t>((n + bs - 1) / bs);
}

}  // namespace

std::int64_t planned_optimizer_steps(const TrainOptions& options, std::size_t train_size) {
  const std::int64_t steps = options.epochs * batches_per_epoch(options, train_size) / accum_of(options);
  return options.max_optimizer_steps > 0 ? std::min(steps, options.max_optimizer_steps) : steps;
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

TrainingRun::TrainingRun(fs::path dir, TrainOptions options, ToyPolicy policy, ToyPolicy reference)
    : dir_(std::move(dir)),
      options_(std::move(options)),
      policy_(std::move(policy)),
      reference_(std::move(reference)) {}

TrainingRun TrainingRun::create(const fs::path& dir, const TrainOptions& options,
                                const ToyPolicy& initial, const nlohmann::json& extra) {
  options.validate();
  if (fs::exists(dir / "config.json")) {
    throw std::invalid_argument(dir.string() + " already holds a training run (use --resume)");
  }
  fs::create_directories(dir / "checkpoints");
  nlohmann::json config = {{"options", train_options_to_json(options)}};
  if (!extra.is_null()) config["extra"] = extra;
  write_file_atomic(dir / "reference.json", initial.to_json().dump() + "\n");
  write_file_atomic(dir / "config.json", config.dump(2) + "\n");
  write_file_atomic(dir / "stats.jsonl", "");
  return TrainingRun(dir, options, initial, initial);
}

TrainingRun TrainingRun::open(const fs::path& dir) {
  const auto config = read_json_file(dir / "config.json");
  TrainOptions options = train_options_from_json(config.at("options"));
  options.validate();
  ToyPolicy reference = ToyPolicy::from_json(read_json_file(dir / "reference.json"));
  ToyPolicy policy = fs::exists(dir / "checkpoint.json")
                         ? ToyPolicy::from_json(read_json_file(dir / "checkpoint.json").at("policy"))
                         : reference;
  return TrainingRun(dir, std::move(options), std::move(policy), std::move(reference));
}

void TrainingRun::write_checkpoint(const nlohmann::json& trainer_state,
                                   std::optional<std::int64_t> numbered) {
  const auto policy_json = policy_.to_json();
  write_file_atomic(dir_ / "checkpoint.json",
                    nlohmann::json{{"policy", policy_json}, {"trainer", trainer_state}}.dump() + "\n");
  if (numbered) {
    std::ostringstream name;
    name << "policy-" << std::setw(6) << std::setfill('0') << *numbered << ".json";
    write_file_atomic(dir_ / "checkpoints" / name.str(), policy_json.dump() + "\n");
  }
}

TrainResult TrainingRun::train(const std::vector<QAInstance>& train, const RewardFn& reward_fn,
                               const StepCallback& on_step) {
  if (train.empty()) throw std::invalid_argument("empty training split");
  const std::int64_t per_epoch = batches_per_epoch(options_, train.size());
  const std::int64_t total_micro = options_.epochs * per_epoch;
  const std::int64_t planned = planned_optimizer_steps(options_, train.size());
  const std::size_t bs = batch_size_of(options_);

  std::optional<nlohmann::json> saved_state;
  if (fs::exists(dir_ / "checkpoint.json")) {
    saved_state = read_json_file(dir_ / "checkpoint.json").at("trainer");
  }

  std::unique_ptr<GrpoTrainer> grpo;
  std::unique_ptr<SupervisedTrainer> supervised;
  std::vector<SupervisedExample> examples;
  if (options_.mode == TrainMode::Grpo) {
    if (!reward_fn) throw std::invalid_argument("GRPO training needs a reward function");
    for (const auto& inst : train) {
      if (!inst.gold_answers) {
        throw std::invalid_argument("instance " + inst.id + " has no materialized gold answers");
      }
    }
    grpo = std::make_unique<GrpoTrainer>(policy_, reference_.clone(), reward_fn, options_.grpo, planned);
    if (saved_state) grpo->load_state(*saved_state);
  } else {
    for (const auto& inst : train) examples.push_back(make_supervised_example(policy_, inst));
    supervised = std::make_unique<SupervisedTrainer>(policy_, options_.supervised, planned);
    if (saved_state) supervised->load_state(*saved_state);
  }
  auto micro_steps = [&] { return grpo ? grpo->micro_steps() : supervised->micro_steps(); };
  auto optimizer_steps = [&] { return grpo ? grpo->optimizer_steps() : supervised->optimizer_steps(); };
  auto trainer_state = [&] { return grpo ? grpo->state_to_json() : supervised->state_to_json(); };

  truncate_stats(dir_ / "stats.jsonl", micro_steps());
  std::ofstream stats_out(dir_ / "stats.jsonl", std::ios::app);
  if (!stats_out) throw std::runtime_error("cannot append to " + (dir_ / "stats.jsonl").string());

  TrainResult result;
  std::int64_t epoch = -1;
  std::vector<std::size_t> order;
  while (micro_steps() < total_micro &&
         (options_.max_optimizer_steps == 0 || optimizer_steps() < options_.max_optimizer_steps)) {
    const std::int64_t m = micro_steps();
    if (m / per_epoch != epoch) {
      epoch = m / per_epoch;
      order = epoch_order(train.size(), options_.mode == TrainMode::Grpo ? options_.grpo.seed
                                                                         : options_.supervised.seed,
                          epoch);
    }
    const std::size_t start = static_cast<std::size_t>(m % per_epoch) * bs;
    const std::size_t end = std::min(train.size(), start + bs);
    UpdateStats stats;
    if (grpo) {
      std::vector<const QAInstance*> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(&train[order[k]]);
      stats = grpo->step(batch);
    } else {
      std::vector<SupervisedExample> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(examples[order[k]]);
      stats = supervised->step(batch);
    }
    auto line = update_stats_to_json(stats);
    line["epoch"] = epoch;
    stats_out << line.dump() << '\n';
    stats_out.flush();
    if (stats.optimizer_stepped && options_.checkpoint_every > 0 &&
        stats.optimizer_step % options_.checkpoint_every == 0) {
      write_checkpoint(trainer_state(), stats.optimizer_step);
    }
    if (on_step) on_step(stats);
    result.last = std::move(stats);
  }
  const bool boundary = grpo ? grpo->at_boundary() : supervised->at_boundary();
  if (boundary) write_checkpoint(trainer_state(), std::nullopt);
  write_file_atomic(dir_ / "policy.json", policy_.to_json().dump() + "\n");
  result.micro_steps = micro_steps();
  result.optimizer_steps = optimizer_steps();
  return result;
}

}  // namespace sparqlrl
