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

#include "sparqlrl/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "sparqlrl/extraction.hpp"
#include "sparqlrl/json_io.hpp"
#include "sparqlrl/parallel.hpp"
#include "sparqlrl/rewards.hpp"

namespace sparqlrl {

namespace {

// Column order of the per-category table.
constexpr QueryType kTableOrder[] = {
    QueryType::Boolean,       QueryType::Count,          QueryType::Disambiguation,
    QueryType::DoubleIntent,  QueryType::DoubleNegation, QueryType::MultipleFacts,
    QueryType::Negation,      QueryType::SingleFact,     QueryType::SuperlativeComparative,
    QueryType::Union,
};

std::string fixed2(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

std::string fixed2(const std::optional<double>& v) { return v ? fixed2(*v) : "N/A"; }

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string table(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& body) {
  std::string out = "|";
  for (const auto& h : header) out += " " + h + " |";
  out += "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? "---|" : ":---:|";
  out += "\n";
  for (const auto& row : body) {
    out += "|";
    for (const auto& cell : row) out += " " + cell + " |";
    out += "\n";
  }
  return out;
}

}  // namespace

nlohmann::json instance_result_to_json(const InstanceResult& r) {
  return {{"id", r.id},
          {"query", r.query_text},
          {"outcome", outcome_to_json(r.outcome)},
          {"f1", r.f1},
          {"exact_match", r.exact_match},
          {"category", to_string(r.category)},
          {"temporal", r.is_temporal},
          {"held_out", r.is_heldout}};
}

bool answers_match(const AnswerSet& generated, const AnswerSet& gold) {
  return answer_f1(generated, gold) == 1.0;
}

std::vector<InstanceResult> evaluate_run(const std::vector<QAInstance>& instances,
                                         const std::vector<std::string>& completions,
                                         ExecutionBackend& backend, QueryCache* cache,
                                         Timeout timeout, unsigned threads) {
  if (instances.size() != completions.size()) {
    throw std::invalid_argument("got " + std::to_string(completions.size()) + " completions for " +
                                std::to_string(instances.size()) + " instances");
  }
  for (const auto& inst : instances) {
    if (!inst.gold_answers) {
      throw std::invalid_argument("instance " + inst.id + " has no materialized gold answers");
    }
  }
  std::vector<InstanceResult> results(instances.size());
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    const QAInstance& inst = instances[i];
    InstanceResult& r = results[i];
    r.id = inst.id;
    r.category = inst.query_type;
    r.is_temporal = inst.is_temporal;
    r.is_heldout = inst.is_heldout;
    r.query_text = extract_query(completions[i]).query_text;
    if (r.query_text.empty()) {
      r.outcome = ExecutionOutcome::failure(ExecutionStatus::ParseOrSyntaxError, "empty query");
    } else if (cache) {
      r.outcome = cache->cached_execute(r.query_text, backend, timeout);
    } else {
      r.outcome = backend.execute(r.query_text, timeout);
    }
    if (r.outcome.ok()) {
      r.f1 = answer_f1(*r.outcome.answers, *inst.gold_answers);
      r.exact_match = r.f1 == 1.0;
    }
  });
  return results;
}

EvalReport aggregate(const std::vector<InstanceResult>& results) {
  if (results.empty()) throw std::invalid_argument("cannot aggregate an empty result set");
  EvalReport report;
  report.count = results.size();
  std::size_t exact = 0, executable = 0, temporal_exact = 0, heldout_exact = 0;
  double f1_sum = 0.0;
  std::map<QueryType, std::pair<std::size_t, double>> per_category;  // exact, f1 sum
  for (const auto& r : results) {
    if (r.exact_match && r.f1 != 1.0) {
      throw std::logic_error("instance " + r.id + " is an exact match with F1 != 1");
    }
    if (!r.outcome.ok() && (r.f1 != 0.0 || r.exact_match)) {
      throw std::logic_error("instance " + r.id + " failed to execute but scores");
    }
    exact += r.exact_match;
    executable += r.outcome.ok();
    f1_sum += r.f1;
    auto& cat = report.categories[r.category];
    ++cat.count;
    per_category[r.category].first += r.exact_match;
    per_category[r.category].second += r.f1;
    if (r.is_temporal) {
      ++report.temporal_count;
      temporal_exact += r.exact_match;
    }
    if (r.is_heldout) {
      ++report.heldout_count;
      heldout_exact += r.exact_match;
    }
  }
  const double n = static_cast<double>(report.count);
  report.em_acc = static_cast<double>(exact) / n;
  report.ex_acc = static_cast<double>(executable) / n;
  report.macro_f1 = f1_sum / n;
  if (report.temporal_count > 0) {
    report.temp_acc = static_cast<double>(temporal_exact) / static_cast<double>(report.temporal_count);
  }
  if (report.heldout_count > 0) {
    report.gen_acc = static_cast<double>(heldout_exact) / static_cast<double>(report.heldout_count);
  }
  double category_f1 = 0.0;
  for (auto& [type, metrics] : report.categories) {
    const double c = static_cast<double>(metrics.count);
    metrics.em_acc = static_cast<double>(per_category[type].first) / c;
    metrics.f1 = per_category[type].second / c;
    category_f1 += metrics.f1;
  }
  report.category_macro_f1 = category_f1 / static_cast<double>(report.categories.size());
  check_report_identities(report);
  return report;
}

void check_report_identities(const EvalReport& report) {
  if (report.ex_acc < report.em_acc) {
    throw std::logic_error("metric identity violated: ex_acc " + std::to_string(report.ex_acc) +
                           " < em_acc " + std::to_string(report.em_acc));
  }
  if (report.macro_f1 < report.em_acc - 1e-12) {
    throw std::logic_error("metric identity violated: macro_f1 " + std::to_string(report.macro_f1) +
                           " < em_acc " + std::to_string(report.em_acc));
  }
  double weighted = 0.0;
  std::size_t total = 0;
  for (const auto& [type, metrics] : report.categories) {
    weighted += metrics.em_acc * static_cast<double>(metrics.count);
    total += metrics.count;
  }
  if (total != report.count) throw std::logic_error("category counts do not sum to the total");
  if (std::abs(weighted / static_cast<double>(total) - report.em_acc) > 1e-9) {
    throw std::logic_error("metric identity violated: category-weighted EM differs from em_acc");
  }
  if (report.temporal_count > report.count || report.heldout_count > report.count) {
    throw std::logic_error("slice larger than the evaluation set");
  }
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json categories = nlohmann::json::object();
  for (const auto& [type, m] : report.categories) {
    categories[to_string(type)] = {{"count", m.count}, {"em_acc", m.em_acc}, {"f1", m.f1}};
  }
  return {{"count", report.count},
          {"em_acc", report.em_acc},
          {"ex_acc", report.ex_acc},
          {"macro_f1", report.macro_f1},
          {"temp_acc", optional_json(report.temp_acc)},
          {"gen_acc", optional_json(report.gen_acc)},
          {"temporal_count", report.temporal_count},
          {"heldout_count", report.heldout_count},
          {"categories", categories},
          {"category_macro_f1", report.category_macro_f1}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.count = j.at("count").get<std::size_t>();
  r.em_acc = j.at("em_acc").get<double>();
  r.ex_acc = j.at("ex_acc").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.temp_acc = optional_from(j.at("temp_acc"));
  r.gen_acc = optional_from(j.at("gen_acc"));
  r.temporal_count = j.at("temporal_count").get<std::size_t>();
  r.heldout_count = j.at("heldout_count").get<std::size_t>();
  for (const auto& [name, m] : j.at("categories").items()) {
    r.categories[query_type_from_string(name)] = {m.at("count").get<std::size_t>(),
                                                  m.at("em_acc").get<double>(),
                                                  m.at("f1").get<double>()};
  }
  r.category_macro_f1 = j.at("category_macro_f1").get<double>();
  return r;
}

std::string render_markdown(const std::vector<ReportRow>& rows) {
  std::vector<std::vector<std::string>> answer_level, by_category, subsets;
  for (const auto& [name, r] : rows) {
    answer_level.push_back({name, fixed2(r.em_acc), fixed2(r.ex_acc), fixed2(r.macro_f1)});
    std::vector<std::string> row = {name};
    for (QueryType t : kTableOrder) {
      auto it = r.categories.find(t);
      row.push_back(it == r.categories.end() ? "N/A" : fixed2(it->second.em_acc));
    }
    by_category.push_back(std::move(row));
    subsets.push_back({name, fixed2(r.temp_acc), fixed2(r.gen_acc)});
  }
  std::vector<std::string> category_header = {"Model"};
  for (QueryType t : kTableOrder) category_header.push_back(short_label(t));

  std::string out = "### Answer-level results\n\n";
  out += table({"Model", "EMAcc", "ExAcc", "F1"}, answer_level);
  out += "\n### Exact match by question category\n\n";
  out += table(category_header, by_category);
  out += "\n### Temporal and held-out template subsets\n\n";
  out += table({"Model", "TempAcc", "GenAcc"}, subsets);
  return out;
}

std::string render_ablation_table(const std::vector<ReportRow>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& [name, r] : rows) {
    body.push_back({name, fixed2(r.em_acc), fixed2(r.ex_acc), fixed2(r.macro_f1), fixed2(r.temp_acc),
                    fixed2(r.gen_acc)});
  }
  return table({"Model", "EMAcc", "ExAcc", "F1", "TempAcc", "GenAcc"}, body);
}

std::vector<CompletionRecord> read_completions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open completions file " + path.string());
  std::vector<CompletionRecord> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("completion").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_completions(const std::filesystem::path& path,
                       const std::vector<CompletionRecord>& records) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    for (const auto& r : records) {
      out << nlohmann::json{{"id", r.id}, {"completion", r.completion}}.dump() << '\n';
    }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> align_completions(const std::vector<QAInstance>& instances,
                                           const std::vector<CompletionRecord>& records) {
  if (records.size() != instances.size()) {
    throw std::invalid_argument("got " + std::to_string(records.size()) + " completions for " +
                                std::to_string(instances.size()) + " instances");
  }
  std::unordered_map<std::string, const std::string*> by_id;
  for (const auto& r : records) {
    if (!by_id.emplace(r.id, &r.completion).second) {
      throw std::invalid_argument("duplicate completion id " + r.id);
    }
  }
  std::vector<std::string> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    auto it = by_id.find(inst.id);
    if (it == by_id.end()) throw std::invalid_argument("no completion for instance " + inst.id);
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace sparqlrl
