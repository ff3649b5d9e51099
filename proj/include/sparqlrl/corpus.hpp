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

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sparqlrl/answer_set.hpp"
#include "sparqlrl/endpoint.hpp"

namespace sparqlrl {

class QueryCache;

enum class QueryType : std::uint8_t {
  SingleFact,
  MultipleFacts,
  Boolean,
  Negation,
  DoubleNegation,
  DoubleIntent,
  Union,
  Count,
  SuperlativeComparative,
  Disambiguation,
};

inline constexpr std::array<QueryType, 10> kAllQueryTypes = {
    QueryType::SingleFact,     QueryType::MultipleFacts, QueryType::Boolean,
    QueryType::Negation,       QueryType::DoubleNegation, QueryType::DoubleIntent,
    QueryType::Union,          QueryType::Count,          QueryType::SuperlativeComparative,
    QueryType::Disambiguation,
};

/// "Single Fact", "Superlative/Comparative", ...
std::string to_string(QueryType type);
/// Column label used in category tables ("SF", "Sup+Comp", ...).
std::string short_label(QueryType type);
/// Case, space and punctuation insensitive; also accepts the DBLP-QuAD
/// spellings (SINGLE_FACT, MULTI_FACT, SUPERLATIVE+COMPARATIVE, ...).
/// Throws std::invalid_argument for anything else.
QueryType query_type_from_string(std::string_view text);

enum class Split : std::uint8_t { Train, Valid, Test };
std::string to_string(Split split);
Split split_from_string(std::string_view text);

struct EntityHint {
  std::string uri;
  std::string label;

  friend bool operator==(const EntityHint&, const EntityHint&) = default;
};

struct RelationHint {
  std::string uri;
  std::string label;
  std::string domain;
  std::string range;
  std::string comment;

  friend bool operator==(const RelationHint&, const RelationHint&) = default;
};

struct QAInstance {
  std::string id;
  std::string question;
  std::vector<EntityHint> entities;
  std::vector<RelationHint> relations;
  std::optional<std::string> gold_query;
  QueryType query_type = QueryType::SingleFact;
  std::string template_id;
  bool is_temporal = false;
  bool is_heldout = false;
  std::optional<AnswerSet> gold_answers;
  /// Set when materialization failed; the instance is then unusable.
  std::optional<std::string> materialization_error;

  bool usable() const { return gold_answers.has_value() && !materialization_error; }

  friend bool operator==(const QAInstance&, const QAInstance&) = default;
};

/// Error in a dataset file; `line` is 1-based (0 when not line-specific).
class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::string source, std::size_t line, const std::string& detail);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Throws std::invalid_argument naming the offending field.
QAInstance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const QAInstance& instance);

/// One JSON object per line; blank lines are skipped.
std::vector<QAInstance> parse_dataset(std::istream& in, const std::string& source = "<stream>");
std::vector<QAInstance> read_dataset_file(const std::filesystem::path& path);
/// Reads `<dir>/<split>.jsonl`.
std::vector<QAInstance> load_dataset(const std::filesystem::path& dir, Split split);

void write_dataset(std::ostream& out, const std::vector<QAInstance>& instances);
/// Writes through a temporary file renamed into place.
void write_dataset_file(const std::filesystem::path& path,
                        const std::vector<QAInstance>& instances);

struct Prompt {
  std::string system_text;
  std::string user_text;

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

/// "[<uri> (label), ...]", "[]" when empty.
std::string render_entities(const std::vector<EntityHint>& entities);
/// "[<uri> (label) [domain: D; range: R; comment: C], ...]" with empty
/// schema fields left out.
std::string render_relations(const std::vector<RelationHint>& relations);

Prompt render_prompt(const QAInstance& instance, bool cot);

/// Executes every gold query and stores the answers. Per-instance failures
/// are recorded in materialization_error. Throws BackendUnavailable if the
/// backend is down and std::invalid_argument if an instance has no gold
/// query. Output order matches input order.
std::vector<QAInstance> materialize_gold_answers(std::vector<QAInstance> instances,
                                                 ExecutionBackend& backend,
                                                 QueryCache* cache = nullptr,
                                                 unsigned threads = 1,
                                                 Timeout timeout = std::nullopt);

}  // namespace sparqlrl
