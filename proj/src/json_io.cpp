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

#include "sparqlrl/json_io.hpp"

#include <stdexcept>

namespace sparqlrl {

nlohmann::json answer_set_to_json(const AnswerSet& answers) {
  switch (answers.kind()) {
    case AnswerKind::Boolean:
      return {{"kind", "boolean"}, {"value", answers.boolean_value()}};
    case AnswerKind::Count:
      return {{"kind", "count"}, {"value", answers.count_value()}};
    case AnswerKind::Bindings: {
      nlohmann::json tuples = nlohmann::json::array();
      for (const auto& t : answers.bindings().tuples) tuples.push_back(t);
      return {{"kind", "bindings"}, {"vars", answers.bindings().vars}, {"tuples", tuples}};
    }
  }
  return {};
}

AnswerSet answer_set_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "boolean") return AnswerSet::boolean(j.at("value").get<bool>());
    if (kind == "count") return AnswerSet::count(j.at("value").get<std::uint64_t>());
    if (kind == "bindings") {
      std::set<AnswerTuple> tuples;
      for (const auto& t : j.at("tuples")) tuples.insert(t.get<AnswerTuple>());
      return AnswerSet::bindings(j.at("vars").get<std::vector<std::string>>(), std::move(tuples));
    }
    throw std::invalid_argument("unknown answer kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed answer set: ") + e.what());
  }
}

nlohmann::json outcome_to_json(const ExecutionOutcome& outcome) {
  nlohmann::json j{{"status", to_string(outcome.status)}};
  if (outcome.answers) j["answers"] = answer_set_to_json(*outcome.answers);
  if (!outcome.message.empty()) j["message"] = outcome.message;
  return j;
}

ExecutionOutcome outcome_from_json(const nlohmann::json& j) {
  try {
    const auto status = execution_status_from_string(j.at("status").get<std::string>());
    if (status == ExecutionStatus::Ok) {
      return ExecutionOutcome::success(answer_set_from_json(j.at("answers")));
    }
    return ExecutionOutcome::failure(status, j.value("message", std::string()));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed outcome: ") + e.what());
  }
}

}  // namespace sparqlrl
