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

#include "sparqlrl/answer_set.hpp"

#include <stdexcept>

namespace sparqlrl {

std::string to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::Boolean: return "boolean";
    case AnswerKind::Bindings: return "bindings";
    case AnswerKind::Count: return "count";
  }
  return "unknown";
}

AnswerSet AnswerSet::boolean(bool value) {
  return AnswerSet(std::variant<bool, Bindings, std::uint64_t>(std::in_place_index<0>, value));
}

AnswerSet AnswerSet::bindings(std::vector<std::string> vars, std::set<AnswerTuple> tuples) {
  for (const auto& t : tuples) {
    if (t.size() != vars.size()) {
      throw std::invalid_argument("answer tuple arity " + std::to_string(t.size()) +
                                  " does not match projection arity " +
                                  std::to_string(vars.size()));
    }
  }
  return AnswerSet(std::variant<bool, Bindings, std::uint64_t>(
      std::in_place_index<1>, Bindings{std::move(vars), std::move(tuples)}));
}

AnswerSet AnswerSet::count(std::uint64_t value) {
  return AnswerSet(std::variant<bool, Bindings, std::uint64_t>(std::in_place_index<2>, value));
}

bool AnswerSet::boolean_value() const {
  if (kind() != AnswerKind::Boolean) throw std::logic_error("answer set is not boolean");
  return std::get<0>(value_);
}

const Bindings& AnswerSet::bindings() const {
  if (kind() != AnswerKind::Bindings) throw std::logic_error("answer set is not bindings");
  return std::get<1>(value_);
}

std::uint64_t AnswerSet::count_value() const {
  if (kind() != AnswerKind::Count) throw std::logic_error("answer set is not a count");
  return std::get<2>(value_);
}

std::size_t AnswerSet::size() const {
  return kind() == AnswerKind::Bindings ? bindings().tuples.size() : 1;
}

std::string describe(const AnswerSet& answers, std::size_t max_tuples) {
  switch (answers.kind()) {
    case AnswerKind::Boolean: return answers.boolean_value() ? "true" : "false";
    case AnswerKind::Count: return "count " + std::to_string(answers.count_value());
    case AnswerKind::Bindings: break;
  }
  const auto& b = answers.bindings();
  std::string out = std::to_string(b.tuples.size()) + " tuple(s)";
  std::size_t shown = 0;
  for (const auto& tuple : b.tuples) {
    if (shown++ == max_tuples) {
      out += " ...";
      break;
    }
    out += shown == 1 ? ": (" : ", (";
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      if (i > 0) out += " ";
      out += tuple[i];
    }
    out += ")";
  }
  return out;
}

}  // namespace sparqlrl
