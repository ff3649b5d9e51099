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

// sparqlrl: materialize, train, evaluate, ablate and score from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparqlrl/corpus.hpp"
#include "sparqlrl/evaluation.hpp"
#include "sparqlrl/pipeline.hpp"
#include "sparqlrl/query_cache.hpp"
#include "sparqlrl/rewards.hpp"
#include "sparqlrl/toy_policy.hpp"
#include "sparqlrl/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sparqlrl;

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs `fn`, reporting any failure as a configuration error.
template <class Fn>
auto validating(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

struct Common {
  std::string data;
  std::string store;
  std::string endpoint;
  std::string cache_file;
  bool clear_cache = false;
  int timeout_ms = 0;
  unsigned threads = 1;

  Timeout timeout() const {
    return timeout_ms > 0 ? Timeout(std::chrono::milliseconds(timeout_ms)) : std::nullopt;
  }
};

void add_backend_options(CLI::App* cmd, Common& c) {
  cmd->add_option("--store", c.store, "N-Triples file for the embedded backend");
  cmd->add_option("--endpoint", c.endpoint,
                  std::string("SPARQL endpoint URL (overridden by ") + kEndpointEnv + ")");
  cmd->add_option("--cache", c.cache_file, "Persistent query cache file (JSON Lines)");
  cmd->add_flag("--clear-cache", c.clear_cache, "Empty the cache file before running");
  cmd->add_option("--timeout-ms", c.timeout_ms, "Per-query timeout, 0 for none")->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void add_data_option(CLI::App* cmd, Common& c, bool required = true) {
  auto* opt = cmd->add_option("--data", c.data, "Dataset directory with train/valid/test.jsonl");
  if (required) opt->required();
}

BackendSpec backend_spec(const Common& c) {
  BackendSpec spec;
  if (!c.store.empty()) spec.store = c.store;
  if (!c.endpoint.empty()) spec.endpoint = c.endpoint;
  return resolve_backend(spec, std::getenv(kEndpointEnv));
}

void require_split_file(const std::string& data, Split split) {
  const fs::path p = fs::path(data) / (to_string(split) + ".jsonl");
  if (!fs::is_regular_file(p)) throw ConfigError("missing dataset file " + p.string());
}

// Backend and cache, created after validation.
struct Services {
  std::unique_ptr<ExecutionBackend> backend;
  QueryCache cache;

  Services(const BackendSpec& spec, const Common& c) : backend(make_backend(spec)) {
    if (!c.cache_file.empty()) {
      cache.attach_file(c.cache_file);
      if (c.clear_cache) cache.clear();
    }
    backend->check_available();
  }
};

void log_dropped(const PreparedSplit& split, Split which) {
  for (const auto& inst : split.dropped) {
    std::cerr << "warning: " << to_string(which) << " instance " << inst.id
              << " skipped: " << inst.materialization_error.value_or("no gold answers") << "\n";
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- materialize

struct MaterializeArgs {
  Common common;
  std::vector<std::string> splits;
  std::string out;
};

int cmd_materialize(const MaterializeArgs& a) {
  auto [spec, splits] = validating([&] {
    auto spec = backend_spec(a.common);
    std::vector<Split> splits;
    if (a.splits.empty()) {
      for (Split s : {Split::Train, Split::Valid, Split::Test}) {
        if (fs::is_regular_file(fs::path(a.common.data) / (to_string(s) + ".jsonl"))) splits.push_back(s);
      }
      if (splits.empty()) throw ConfigError("no split files in " + a.common.data);
    } else {
      for (const auto& name : a.splits) {
        splits.push_back(split_from_string(name));
        require_split_file(a.common.data, splits.back());
      }
    }
    for (Split s : splits) {
      for (const auto& inst : load_dataset(a.common.data, s)) {
        if (!inst.gold_query) throw ConfigError("instance " + inst.id + " has no gold query");
      }
    }
    return std::pair{spec, splits};
  });

  Services services(spec, a.common);
  std::vector<std::vector<QAInstance>> done;
  for (Split s : splits) {
    auto instances = load_dataset(a.common.data, s);
    for (auto& inst : instances) {
      inst.gold_answers.reset();
      inst.materialization_error.reset();
    }
    done.push_back(materialize_gold_answers(std::move(instances), *services.backend, &services.cache,
                                            a.common.threads, a.common.timeout()));
  }
  fs::create_directories(a.out);
  for (std::size_t i = 0; i < splits.size(); ++i) {
    std::size_t failed = 0;
    for (const auto& inst : done[i]) failed += inst.materialization_error.has_value();
    const fs::path path = fs::path(a.out) / (to_string(splits[i]) + ".jsonl");
    write_dataset_file(path, done[i]);
    std::cout << path.string() << ": " << done[i].size() << " instances, " << failed << " failed\n";
  }
  return 0;
}

// ---------------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string config;
  std::string preset;
  std::string mode;
  std::string prior;
  std::string out;
  std::optional<int> epochs;
  std::optional<std::int64_t> max_steps;
  std::optional<std::int64_t> checkpoint_every;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  bool quiet = false;
};

TrainOptions load_options(const std::string& path) {
  if (path.empty()) return {};
  return train_options_from_json(read_json_file(path));
}

void apply_overrides(TrainOptions& o, const TrainArgs& a) {
  if (!a.mode.empty()) o.mode = train_mode_from_string(a.mode);
  if (!a.preset.empty()) o.reward = apply_preset(o.reward, a.preset);
  if (a.epochs) o.epochs = *a.epochs;
  if (a.max_steps) o.max_optimizer_steps = *a.max_steps;
  if (a.checkpoint_every) o.checkpoint_every = *a.checkpoint_every;
  if (a.seed) o.grpo.seed = o.supervised.seed = *a.seed;
  o.grpo.threads = a.common.threads;
}

fs::path prior_path(const TrainArgs& a) {
  return a.prior.empty() ? fs::path(a.common.data) / "prior.txt" : fs::path(a.prior);
}

StepCallback progress(const TrainOptions& o, bool quiet) {
  if (quiet) return {};
  return [mode = o.mode](const UpdateStats& s) {
    if (!s.optimizer_stepped || s.optimizer_step % 100 != 0) return;
    std::cerr << "step " << s.optimizer_step;
    if (mode == TrainMode::Grpo) std::cerr << "  reward " << s.mean_reward << "  kl " << s.kl;
    std::cerr << "  objective " << s.objective << "\n";
  };
}

// Trains a fresh run in `dir` and returns it.
TrainingRun run_training(const fs::path& dir, const TrainOptions& options,
                         const std::vector<QAInstance>& train, const fs::path& prior,
                         const PriorConfig& prior_config, Services& services, const Common& c,
                         const json& extra, bool quiet) {
  const ToyPolicy initial = make_initial_policy(train, prior, prior_config);
  auto run = TrainingRun::create(dir, options, initial, extra);
  RewardFn reward;
  if (options.mode == TrainMode::Grpo) {
    reward = make_reward_fn(options.reward, *services.backend, &services.cache, c.timeout());
  }
  run.train(train, reward, progress(options, quiet));
  return run;
}

int cmd_train(const TrainArgs& a) {
  struct Plan {
    BackendSpec spec;
    TrainOptions options;
  };
  const Plan plan = validating([&] {
    Plan p{backend_spec(a.common), {}};
    if (a.resume) {
      if (!fs::is_regular_file(fs::path(a.out) / "config.json")) {
        throw ConfigError("no training run to resume in " + a.out);
      }
      p.options = train_options_from_json(read_json_file(fs::path(a.out) / "config.json").at("options"));
    } else {
      if (fs::exists(fs::path(a.out) / "config.json")) {
        throw ConfigError(a.out + " already holds a training run (use --resume)");
      }
      p.options = load_options(a.config);
      apply_overrides(p.options, a);
      if (!fs::is_regular_file(prior_path(a))) throw ConfigError("missing prior file " + prior_path(a).string());
    }
    p.options.validate();
    require_split_file(a.common.data, Split::Train);
    const auto raw = load_dataset(a.common.data, Split::Train);
    if (p.options.mode == TrainMode::Grpo) {
      check_gold_queries(p.options.reward, raw);
    } else {
      for (const auto& inst : raw) {
        if (!inst.gold_query) throw ConfigError("supervised training needs gold queries; " + inst.id + " has none");
      }
    }
    return p;
  });

  Services services(plan.spec, a.common);
  auto train = prepare_split(a.common.data, Split::Train, *services.backend, &services.cache,
                             a.common.threads, a.common.timeout());
  log_dropped(train, Split::Train);

  if (a.resume) {
    auto run = TrainingRun::open(a.out);
    RewardFn reward;
    if (run.options().mode == TrainMode::Grpo) {
      reward = make_reward_fn(run.options().reward, *services.backend, &services.cache, a.common.timeout());
    }
    const auto result = run.train(train.instances, reward, progress(run.options(), a.quiet));
    std::cout << a.out << ": " << result.optimizer_steps << " optimizer steps\n";
    return 0;
  }
  PriorConfig prior_config;
  prior_config.seed = a.seed.value_or(prior_config.seed);
  const json extra = {{"data", a.common.data},
                      {"prior", prior_path(a).string()},
                      {"prior_config", prior_config_to_json(prior_config)},
                      {"backend", services.backend->describe()}};
  auto run = run_training(a.out, plan.options, train.instances, prior_path(a), prior_config,
                          services, a.common, extra, a.quiet);
  std::cout << a.out << ": training finished, policy in " << (fs::path(a.out) / "policy.json").string() << "\n";
  return 0;
}

// ------------------------------------------------------------------- evaluate

struct EvaluateArgs {
  Common common;
  std::string split = "test";
  std::string run;
  std::string policy;
  std::string completions;
  std::string out;
  std::string name;
  std::optional<bool> cot;
  std::optional<int> max_new_tokens;
};

void write_reports(const fs::path& out, const std::string& name, const PolicyEvaluation& ev,
                   const std::vector<QAInstance>& instances, bool write_completion_file) {
  fs::create_directories(out);
  const std::string label = file_label(name);
  json report = report_to_json(ev.report);
  report["name"] = name;
  write_file_atomic(out / ("report-" + label + ".json"), report.dump(2) + "\n");
  write_file_atomic(out / ("report-" + label + ".md"), render_markdown({{name, ev.report}}));
  std::string lines;
  for (const auto& r : ev.results) lines += instance_result_to_json(r).dump() + "\n";
  write_file_atomic(out / ("results-" + label + ".jsonl"), lines);
  if (write_completion_file) {
    std::vector<CompletionRecord> records;
    for (std::size_t i = 0; i < instances.size(); ++i) records.push_back({instances[i].id, ev.completions[i]});
    write_completions(out / ("completions-" + label + ".jsonl"), records);
  }
}

std::string run_name(const TrainOptions& o) {
  return o.mode == TrainMode::Grpo ? o.reward.name : "supervised";
}

int cmd_evaluate(const EvaluateArgs& a) {
  struct Plan {
    BackendSpec spec;
    Split split;
    fs::path policy_file;
    std::string name;
    bool cot = true;
    int max_new_tokens = 1024;
  };
  const Plan plan = validating([&] {
    Plan p{backend_spec(a.common), split_from_string(a.split), {}, a.name};
    const int sources = !a.run.empty() + !a.policy.empty() + !a.completions.empty();
    if (sources != 1) throw ConfigError("give exactly one of --run, --policy, --completions");
    require_split_file(a.common.data, p.split);
    if (!a.run.empty()) {
      const auto cfg = read_json_file(fs::path(a.run) / "config.json");
      const auto options = train_options_from_json(cfg.at("options"));
      p.policy_file = fs::path(a.run) / "policy.json";
      if (p.name.empty()) p.name = run_name(options);
      p.cot = options.mode == TrainMode::Grpo && options.grpo.cot;
      p.max_new_tokens = options.grpo.decoding.max_new_tokens;
    } else if (!a.policy.empty()) {
      p.policy_file = a.policy;
      if (p.name.empty()) p.name = fs::path(a.policy).stem().string();
    } else if (p.name.empty()) {
      p.name = fs::path(a.completions).stem().string();
    }
    if (!p.policy_file.empty() && !fs::is_regular_file(p.policy_file)) {
      throw ConfigError("missing policy file " + p.policy_file.string());
    }
    if (!a.completions.empty() && !fs::is_regular_file(a.completions)) {
      throw ConfigError("missing completions file " + a.completions);
    }
    if (a.cot) p.cot = *a.cot;
    if (a.max_new_tokens) p.max_new_tokens = *a.max_new_tokens;
    if (p.max_new_tokens < 1) throw ConfigError("--max-new-tokens must be positive");
    return p;
  });

  Services services(plan.spec, a.common);
  auto split = prepare_split(a.common.data, plan.split, *services.backend, &services.cache,
                             a.common.threads, a.common.timeout());
  log_dropped(split, plan.split);
  PolicyEvaluation ev;
  if (!plan.policy_file.empty()) {
    const ToyPolicy policy = ToyPolicy::load(plan.policy_file);
    ev = evaluate_policy(policy, split.instances, *services.backend, &services.cache, plan.cot,
                         plan.max_new_tokens, a.common.threads, a.common.timeout());
  } else {
    auto texts = align_completions(split.instances, read_completions(a.completions));
    ev = evaluate_completions(split.instances, std::move(texts), *services.backend, &services.cache,
                              a.common.threads, a.common.timeout());
  }
  write_reports(a.out, plan.name, ev, split.instances, !plan.policy_file.empty());
  std::cout << render_markdown({{plan.name, ev.report}});
  std::cerr << "cache: " << services.cache.hits() << " hits, " << services.cache.misses() << " misses\n";
  return 0;
}

// --------------------------------------------------------------------- ablate

struct AblateArgs {
  TrainArgs train;
  std::vector<std::string> presets;
};

int cmd_ablate(const AblateArgs& a) {
  const TrainArgs& t = a.train;
  struct Plan {
    BackendSpec spec;
    TrainOptions base;
    std::vector<AblationEntry> entries;
  };
  const Plan plan = validating([&] {
    Plan p{backend_spec(t.common), load_options(t.config), plan_ablation(a.presets)};
    apply_overrides(p.base, t);
    p.base.mode = TrainMode::Grpo;
    require_split_file(t.common.data, Split::Train);
    require_split_file(t.common.data, Split::Test);
    if (!fs::is_regular_file(prior_path(t))) throw ConfigError("missing prior file " + prior_path(t).string());
    const auto raw = load_dataset(t.common.data, Split::Train);
    for (const auto& e : p.entries) {
      TrainOptions o = p.base;
      o.reward = apply_preset(p.base.reward, e.preset);
      o.validate();
      check_gold_queries(o.reward, raw);
      if (fs::exists(fs::path(t.out) / file_label(e.label) / "config.json")) {
        throw ConfigError((fs::path(t.out) / file_label(e.label)).string() + " already holds a training run");
      }
    }
    return p;
  });

  Services services(plan.spec, t.common);
  auto train = prepare_split(t.common.data, Split::Train, *services.backend, &services.cache,
                             t.common.threads, t.common.timeout());
  log_dropped(train, Split::Train);
  auto test = prepare_split(t.common.data, Split::Test, *services.backend, &services.cache,
                            t.common.threads, t.common.timeout());
  log_dropped(test, Split::Test);

  std::vector<ReportRow> rows;
  json summary = json::array();
  for (const auto& e : plan.entries) {
    TrainOptions o = plan.base;
    o.reward = apply_preset(plan.base.reward, e.preset);
    o.grpo.seed += e.seed_offset;
    PriorConfig prior_config;
    prior_config.seed = t.seed.value_or(prior_config.seed);
    const fs::path dir = fs::path(t.out) / file_label(e.label);
    std::cerr << "== " << e.label << " (seed " << o.grpo.seed << ")\n";
    const json extra = {{"data", t.common.data},
                        {"prior", prior_path(t).string()},
                        {"prior_config", prior_config_to_json(prior_config)},
                        {"backend", services.backend->describe()},
                        {"ablation_label", e.label}};
    auto run = run_training(dir, o, train.instances, prior_path(t), prior_config, services,
                            t.common, extra, t.quiet);
    auto ev = evaluate_policy(run.policy(), test.instances, *services.backend, &services.cache,
                              o.grpo.cot, o.grpo.decoding.max_new_tokens, t.common.threads,
                              t.common.timeout());
    write_reports(t.out, e.label, ev, test.instances, true);
    rows.emplace_back(e.label, ev.report);
    summary.push_back({{"label", e.label}, {"preset", e.preset}, {"seed", o.grpo.seed},
                       {"report", report_to_json(ev.report)}});
  }
  const std::string table = render_ablation_table(rows);
  write_file_atomic(fs::path(t.out) / "ablation.md", table);
  write_file_atomic(fs::path(t.out) / "ablation.json", summary.dump(2) + "\n");
  std::cout << table;
  return 0;
}

// ---------------------------------------------------------------------- score

struct ScoreArgs {
  Common common;
  std::string split = "test";
  std::string id;
  std::string completion;
  std::string completion_file;
  std::string preset = "exec+format+struct+len";
  std::string reward_config;
};

int cmd_score(const ScoreArgs& a) {
  struct Plan {
    BackendSpec spec;
    QAInstance instance;
    RewardConfig reward;
    std::string text;
  };
  Plan plan = validating([&] {
    Plan p{backend_spec(a.common), {}, {}, {}};
    if (a.completion.empty() == a.completion_file.empty()) {
      throw ConfigError("give exactly one of --completion, --completion-file");
    }
    p.text = a.completion_file.empty() ? a.completion : read_text_file(a.completion_file);
    p.reward = a.reward_config.empty() ? reward_preset(a.preset) : load_reward_config(a.reward_config);
    p.reward.validate();
    const Split split = split_from_string(a.split);
    require_split_file(a.common.data, split);
    bool found = false;
    for (auto& inst : load_dataset(a.common.data, split)) {
      if (inst.id == a.id) {
        p.instance = std::move(inst);
        found = true;
      }
    }
    if (!found) throw ConfigError("no instance " + a.id + " in the " + a.split + " split");
    check_gold_queries(p.reward, {p.instance});
    return p;
  });

  Services services(plan.spec, a.common);
  if (!plan.instance.usable()) {
    plan.instance = materialize_gold_answers({plan.instance}, *services.backend, &services.cache, 1,
                                             a.common.timeout())
                        .front();
    if (!plan.instance.usable()) {
      throw std::runtime_error("gold query of " + plan.instance.id + " failed: " +
                               plan.instance.materialization_error.value_or("?"));
    }
  }
  const ScoringContext context{services.backend.get(), &services.cache, a.common.timeout(), {}};
  const auto breakdown = score_completion(make_completion(plan.text), plan.instance, plan.reward, context);
  std::cout << reward_breakdown_to_json(breakdown).dump(2) << "\n";
  return 0;
}

void add_train_options(CLI::App* cmd, TrainArgs& t, bool with_mode) {
  add_data_option(cmd, t.common);
  add_backend_options(cmd, t.common);
  cmd->add_option("--config", t.config, "Training options JSON");
  if (with_mode) {
    cmd->add_option("--preset", t.preset, "Reward preset (keeps the config's length targets)");
    cmd->add_option("--mode", t.mode, "grpo or supervised")->check(CLI::IsMember({"grpo", "supervised"}));
    cmd->add_flag("--resume", t.resume, "Continue the run in --out from its checkpoint");
  }
  cmd->add_option("--prior", t.prior, "Prior file (default <data>/prior.txt)");
  cmd->add_option("--out", t.out, "Output directory")->required();
  cmd->add_option("--epochs", t.epochs, "Passes over the training split")->check(CLI::PositiveNumber);
  cmd->add_option("--max-steps", t.max_steps, "Optimizer step limit")->check(CLI::NonNegativeNumber);
  cmd->add_option("--checkpoint-every", t.checkpoint_every, "Checkpoint period in optimizer steps")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", t.seed, "Seed for prior pretraining, rollouts and shuffling");
  cmd->add_flag("--quiet", t.quiet, "No progress lines");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outcome-rewarded GRPO for Text-to-SPARQL"};
  app.require_subcommand(1);

  MaterializeArgs materialize;
  auto* m = app.add_subcommand("materialize", "Execute gold queries and store their answers");
  add_data_option(m, materialize.common);
  add_backend_options(m, materialize.common);
  m->add_option("--split", materialize.splits, "Splits to process (default: all present)");
  m->add_option("--out", materialize.out, "Output directory")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a toy policy with GRPO or cross-entropy");
  add_train_options(t, train, true);

  EvaluateArgs evaluate;
  auto* e = app.add_subcommand("evaluate", "Greedy-decode a policy or read completions and report metrics");
  add_data_option(e, evaluate.common);
  add_backend_options(e, evaluate.common);
  e->add_option("--split", evaluate.split, "Split to evaluate");
  e->add_option("--run", evaluate.run, "Training run directory");
  e->add_option("--policy", evaluate.policy, "Policy JSON file");
  e->add_option("--completions", evaluate.completions, "Completions JSON Lines file");
  e->add_option("--out", evaluate.out, "Report directory")->required();
  e->add_option("--name", evaluate.name, "Report name (default: the run's preset)");
  e->add_option("--cot", evaluate.cot, "Use the chain-of-thought prompt (true/false)");
  e->add_option("--max-new-tokens", evaluate.max_new_tokens, "Decoding length limit");

  AblateArgs ablate;
  auto* ab = app.add_subcommand("ablate", "Train and evaluate one policy per reward preset");
  add_train_options(ab, ablate.train, false);
  ab->add_option("--presets", ablate.presets, "Reward presets, repeats allowed")->required();

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Print the reward breakdown of one completion");
  add_data_option(s, score.common);
  add_backend_options(s, score.common);
  s->add_option("--split", score.split, "Split holding the instance");
  s->add_option("--id", score.id, "Instance id")->required();
  s->add_option("--completion", score.completion, "Completion text");
  s->add_option("--completion-file", score.completion_file, "File with the completion text");
  s->add_option("--preset", score.preset, "Reward preset");
  s->add_option("--reward-config", score.reward_config, "Reward config JSON (instead of --preset)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*m) return cmd_materialize(materialize);
    if (*t) return cmd_train(train);
    if (*e) return cmd_evaluate(evaluate);
    if (*ab) return cmd_ablate(ablate);
    if (*s) return cmd_score(score);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kConfigError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}
