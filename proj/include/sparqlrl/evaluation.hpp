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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sparqlrl/corpus.hpp"
#include "sparqlrl/endpoint.hpp"
#include "sparqlrl/query_cache.hpp"

namespace sparqlrl {

struct InstanceResult {
  std::string id;
  std::string query_text;
  ExecutionOutcome outcome;
  double f1 = 0.0;
  bool exact_match = false;
  QueryType category = QueryType::SingleFact;
  bool is_temporal = false;
  bool is_heldout = false;
};

nlohmann::json instance_result_to_json(const InstanceResult& r);

/// Same answer kind and value; bindings compare as sets of trimmed tuples.
bool answers_match(const AnswerSet& generated, const AnswerSet& gold);

/// Extracts, executes and compares one completion per instance (same
/// order). Every instance needs materialized gold answers. An empty
/// extracted query counts as a syntax error without reaching the backend.
std::vector<InstanceResult> evaluate_run(const std::vector<QAInstance>& instances,
                                         const std::vector<std::string>& completions,
                                         ExecutionBackend& backend, QueryCache* cache = nullptr,
                                         Timeout timeout = std::nullopt, unsigned threads = 1);

struct CategoryMetrics {
  std::size_t count = 0;
  double em_acc = 0.0;
  double f1 = 0.0;

  friend bool operator==(const CategoryMetrics&, const CategoryMetrics&) = default;
};

struct EvalReport {
  std::size_t count = 0;
  double em_acc = 0.0;
  double ex_acc = 0.0;
  /// Mean of per-instance answer F1.
  double macro_f1 = 0.0;
  /// EM over temporal / held-out instances; empty when the slice is empty.
  std::optional<double> temp_acc;
  std::optional<double> gen_acc;
  std::size_t temporal_count = 0;
  std::size_t heldout_count = 0;
  /// Categories with at least one instance.
  std::map<QueryType, CategoryMetrics> categories;
  /// Mean over present categories of their mean F1.
  double category_macro_f1 = 0.0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Throws std::invalid_argument on empty input and std::logic_error when a
/// metric identity fails (ex >= em, F1 >= em, count-weighted category EM
/// equal to overall EM within 1e-9).
EvalReport aggregate(const std::vector<InstanceResult>& results);

/// The identity checks run by aggregate.
void check_report_identities(const EvalReport& report);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

using ReportRow = std::pair<std::string, EvalReport>;

/// Answer-level, per-category and temporal/held-out tables, one row per
/// model.
std::string render_markdown(const std::vector<ReportRow>& rows);
/// EMAcc / ExAcc / F1 / TempAcc / GenAcc, one row per configuration.
std::string render_ablation_table(const std::vector<ReportRow>& rows);

struct CompletionRecord {
  std::string id;
  std::string completion;
};

/// JSON Lines of {"id", "completion"}.
std::vector<CompletionRecord> read_completions(const std::filesystem::path& path);
void write_completions(const std::filesystem::path& path, const std::vector<CompletionRecord>& records);

/// Completion texts in instance order. Throws std::invalid_argument on a
/// count mismatch, duplicate ids or ids that match no instance.
std::vector<std::string> align_completions(const std::vector<QAInstance>& instances,
                                           const std::vector<CompletionRecord>& records);

}  // namespace sparqlrl
