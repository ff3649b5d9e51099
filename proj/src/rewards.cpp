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

#include "sparqlrl/rewards.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "sparqlrl/bleu.hpp"
#include "sparqlrl/query_cache.hpp"

namespace sparqlrl {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::set<AnswerTuple> trimmed(const Bindings& b) {
  std::set<AnswerTuple> out;
  for (const auto& t : b.tuples) {
    AnswerTuple row;
    row.reserve(t.size());
    for (const auto& cell : t) row.push_back(trim(cell));
    out.insert(std::move(row));
  }
  return out;
}

std::size_t idx(RewardComponent c) { return static_cast<std::size_t>(c); }

}  // namespace

std::string to_string(RewardComponent c) {
  switch (c) {
    case RewardComponent::Exec: return "exec";
    case RewardComponent::Sim: return "sim";
    case RewardComponent::Struct: return "struct";
    case RewardComponent::Format: return "format";
    case RewardComponent::Len: return "len";
    case RewardComponent::LenRatio: return "len_ratio";
  }
  return "?";
}

RewardComponent reward_component_from_string(std::string_view name) {
  for (auto c : kAllRewardComponents) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown reward component '" + std::string(name) + "'");
}

bool needs_gold_query(RewardComponent c) {
  return c == RewardComponent::Sim || c == RewardComponent::LenRatio;
}

void RewardConfig::validate() const {
  if (len_target >= len_max) {
    throw std::invalid_argument("len_target must be smaller than len_max");
  }
  if (len_ratio_alpha < 0) throw std::invalid_argument("len_ratio_alpha must be non-negative");
  if (bleu_epsilon <= 0) throw std::invalid_argument("bleu_epsilon must be positive");
  for (auto c : kAllRewardComponents) {
    if (is_enabled(c) && needs_gold_query(c) && !gold_available) {
      throw std::invalid_argument("reward component '" + to_string(c) +
                                  "' requires gold_available");
    }
  }
}

double RewardConfig::max_total() const {
  double total = 0;
  for (auto c : kAllRewardComponents) {
    if (is_enabled(c)) total += std::max(0.0, weight(c));
  }
  return total;
}

double RewardConfig::min_total() const {
  double total = 0;
  for (auto c : kAllRewardComponents) {
    if (!is_enabled(c)) continue;
    const double low = c == RewardComponent::Exec ? std::min(0.0, exec_failure_penalty) : 0.0;
    total += std::min(weight(c) * low, weight(c) * 1.0);
  }
  return total;
}

const std::vector<std::string>& reward_preset_names() {
  static const std::vector<std::string> names = {
      "exec", "exec+format", "exec+format+struct", "exec+format+struct+len", "full-with-gold"};
  return names;
}

RewardConfig reward_preset(std::string_view name) {
  RewardConfig config;
  config.name = std::string(name);
  if (name == "full-with-gold") return config;
  config.gold_available = false;
  config.enabled = {};
  config.enabled[idx(RewardComponent::Exec)] = true;
  if (name == "exec") return config;
  config.enabled[idx(RewardComponent::Format)] = true;
  if (name == "exec+format") return config;
  config.enabled[idx(RewardComponent::Struct)] = true;
  if (name == "exec+format+struct") return config;
  config.enabled[idx(RewardComponent::Len)] = true;
  if (name == "exec+format+struct+len") return config;
  throw std::invalid_argument("unknown reward preset '" + std::string(name) + "'");
}

RewardConfig reward_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("reward config must be a JSON object");
  RewardConfig config;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "name") {
        config.name = value.get<std::string>();
      } else if (key == "weights") {
        for (const auto& [c, w] : value.items()) {
          config.weights[idx(reward_component_from_string(c))] = w.get<double>();
        }
      } else if (key == "enabled") {
        config.enabled = {};
        for (const auto& c : value) {
          config.enabled[idx(reward_component_from_string(c.get<std::string>()))] = true;
        }
      } else if (key == "exec_failure_penalty") {
        config.exec_failure_penalty = value.get<double>();
      } else if (key == "len_target") {
        config.len_target = value.get<int>();
      } else if (key == "len_max") {
        config.len_max = value.get<int>();
      } else if (key == "len_ratio_alpha") {
        config.len_ratio_alpha = value.get<double>();
      } else if (key == "bleu_epsilon") {
        config.bleu_epsilon = value.get<double>();
      } else if (key == "gold_available") {
        config.gold_available = value.get<bool>();
      } else {
        throw std::invalid_argument("unknown reward config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed reward config: ") + e.what());
  }
  config.validate();
  return config;
}

nlohmann::json reward_config_to_json(const RewardConfig& config) {
  nlohmann::json weights = nlohmann::json::object();
  nlohmann::json enabled = nlohmann::json::array();
  for (auto c : kAllRewardComponents) {
    weights[to_string(c)] = config.weight(c);
    if (config.is_enabled(c)) enabled.push_back(to_string(c));
  }
  return {{"name", config.name},
          {"weights", weights},
          {"enabled", enabled},
          {"exec_failure_penalty", config.exec_failure_penalty},
          {"len_target", config.len_target},
          {"len_max", config.len_max},
          {"len_ratio_alpha", config.len_ratio_alpha},
          {"bleu_epsilon", config.bleu_epsilon},
          {"gold_available", config.gold_available}};
}

RewardConfig load_reward_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open reward config " + path.string());
  try {
    return reward_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

nlohmann::json reward_breakdown_to_json(const RewardBreakdown& b) {
  nlohmann::json components = nlohmann::json::object();
  for (auto c : kAllRewardComponents) {
    components[to_string(c)] = b.get(c) ? nlohmann::json(*b.get(c)) : nlohmann::json(nullptr);
  }
  return {{"components", components},
          {"total", b.total},
          {"execution_status", to_string(b.execution_status)},
          {"query", b.query_text}};
}

double answer_f1(const AnswerSet& generated, const AnswerSet& gold) {
  if (generated.kind() != gold.kind()) return 0.0;
  switch (gold.kind()) {
    case AnswerKind::Boolean:
      return generated.boolean_value() == gold.boolean_value() ? 1.0 : 0.0;
    case AnswerKind::Count:
      return generated.count_value() == gold.count_value() ? 1.0 : 0.0;
    case AnswerKind::Bindings: break;
  }
  const auto gen = trimmed(generated.bindings());
  const auto ref = trimmed(gold.bindings());
  if (gen.empty() && ref.empty()) return 1.0;
  if (gen.empty() || ref.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : gen) common += ref.count(t);
  if (common == 0) return 0.0;
  const double p = static_cast<double>(common) / static_cast<double>(gen.size());
  const double r = static_cast<double>(common) / static_cast<double>(ref.size());
  return 2 * p * r / (p + r);
}

double r_exec(const ExecutionOutcome& outcome, const AnswerSet& gold, double failure_penalty) {
  if (!outcome.ok()) return failure_penalty;
  return answer_f1(*outcome.answers, gold);
}

double r_struct(std::string_view query_text, const std::vector<EntityHint>& entities,
                const std::vector<RelationHint>& relations) {
  auto all_present = [&](const auto& hints) {
    return std::all_of(hints.begin(), hints.end(), [&](const auto& h) {
      return query_text.find(h.uri) != std::string_view::npos;
    });
  };
  return 0.5 * (all_present(relations) ? 1.0 : 0.0) + 0.5 * (all_present(entities) ? 1.0 : 0.0);
}

double r_format(const Completion& completion) {
  const Extraction e = extract_query(completion.text);
  if (e.had_think_close) return e.query_text.empty() ? 0.0 : 1.0;
  return trim(completion.text).empty() ? 0.0 : 1.0;
}

double r_len(std::size_t token_count, int target, int max) {
  if (target >= max) throw std::invalid_argument("r_len needs target < max");
  const double x = static_cast<double>(token_count);
  return std::clamp(1.0 - (x - target) / static_cast<double>(max - target), 0.0, 1.0);
}

double r_sim(std::string_view generated_query, std::string_view gold_query, double epsilon) {
  return sentence_bleu(tokenize_query(generated_query), tokenize_query(gold_query), epsilon);
}

double r_len_ratio(std::size_t generated_tokens, std::size_t gold_tokens, double alpha) {
  if (generated_tokens == 0 || gold_tokens == 0) return 0.0;
  const double r = static_cast<double>(generated_tokens) / static_cast<double>(gold_tokens);
  return std::exp(-alpha * std::abs(std::log(r)));
}

RewardBreakdown score_completion(const Completion& completion, const QAInstance& instance,
                                 const RewardConfig& config, const ScoringContext& context) {
  if (!instance.gold_answers) {
    throw std::invalid_argument("instance " + instance.id + " has no gold answers");
  }
  bool gold_needed = false;
  for (auto c : kAllRewardComponents) gold_needed |= config.is_enabled(c) && needs_gold_query(c);
  if (gold_needed && !instance.gold_query) {
    throw std::invalid_argument("instance " + instance.id + " has no gold query");
  }

  RewardBreakdown out;
  out.query_text = extract_query(completion.text).query_text;
  auto set = [&](RewardComponent c, double v) { out.values[idx(c)] = v; };

  if (config.is_enabled(RewardComponent::Exec)) {
    if (!context.backend) throw std::invalid_argument("score_completion needs a backend");
    ExecutionOutcome outcome;
    if (out.query_text.empty()) {
      outcome = ExecutionOutcome::failure(ExecutionStatus::ParseOrSyntaxError, "empty query");
    } else if (context.cache) {
      outcome = context.cache->cached_execute(out.query_text, *context.backend, context.timeout);
    } else {
      outcome = context.backend->execute(out.query_text, context.timeout);
    }
    out.execution_status = outcome.status;
    set(RewardComponent::Exec, r_exec(outcome, *instance.gold_answers, config.exec_failure_penalty));
  }
  if (config.is_enabled(RewardComponent::Sim)) {
    set(RewardComponent::Sim, r_sim(out.query_text, *instance.gold_query, config.bleu_epsilon));
  }
  if (config.is_enabled(RewardComponent::Struct)) {
    set(RewardComponent::Struct, r_struct(out.query_text, instance.entities, instance.relations));
  }
  if (config.is_enabled(RewardComponent::Format)) {
    set(RewardComponent::Format, r_format(completion));
  }
  if (config.is_enabled(RewardComponent::Len)) {
    set(RewardComponent::Len, r_len(completion.token_count, config.len_target, config.len_max));
  }
  if (config.is_enabled(RewardComponent::LenRatio)) {
    const auto count = context.count_tokens ? context.count_tokens
                                            : TokenCounter([](std::string_view s) {
                                                return count_query_tokens(s);
                                              });
    set(RewardComponent::LenRatio,
        r_len_ratio(count(out.query_text), count(*instance.gold_query), config.len_ratio_alpha));
  }
  for (auto c : kAllRewardComponents) {
    if (out.get(c)) out.total += config.weight(c) * *out.get(c);
  }
  return out;
}

}  // namespace sparqlrl
