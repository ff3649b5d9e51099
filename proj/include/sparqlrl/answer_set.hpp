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
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace sparqlrl {

enum class AnswerKind : std::uint8_t { Boolean, Bindings, Count };

std::string to_string(AnswerKind kind);

using AnswerTuple = std::vector<std::string>;

/// Set of projected tuples. Each tuple holds lexical forms (IRIs without
/// brackets, literal lexical values) in `vars` order; unbound cells are "".
struct Bindings {
  std::vector<std::string> vars;
  std::set<AnswerTuple> tuples;

  friend bool operator==(const Bindings&, const Bindings&) = default;
};

/// Normalized execution result: exactly one of a boolean, a tuple set or a
/// count.
class AnswerSet {
 public:
  AnswerSet() : value_(false) {}

  static AnswerSet boolean(bool value);
  /// Throws std::invalid_argument when a tuple's arity differs from vars.
  static AnswerSet bindings(std::vector<std::string> vars, std::set<AnswerTuple> tuples);
  static AnswerSet count(std::uint64_t value);

  AnswerKind kind() const { return static_cast<AnswerKind>(value_.index()); }

  /// Accessors throw std::logic_error when called for the wrong kind.
  bool boolean_value() const;
  const Bindings& bindings() const;
  std::uint64_t count_value() const;

  /// Number of tuples, 1 for boolean and count answers.
  std::size_t size() const;

  friend bool operator==(const AnswerSet&, const AnswerSet&) = default;

 private:
  explicit AnswerSet(std::variant<bool, Bindings, std::uint64_t> v) : value_(std::move(v)) {}

  std::variant<bool, Bindings, std::uint64_t> value_;
};

/// Short human-readable rendering for logs and CLI output.
std::string describe(const AnswerSet& answers, std::size_t max_tuples = 5);

}  // namespace sparqlrl
