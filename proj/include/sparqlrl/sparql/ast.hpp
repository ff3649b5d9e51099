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

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sparqlrl::sparql {

enum class TermKind : std::uint8_t { Iri, Literal };

/// An RDF term. IRIs are stored without angle brackets; literals keep their
/// lexical form and an optional datatype IRI (or "@lang" for tagged strings).
struct Term {
  TermKind kind = TermKind::Iri;
  std::string value;
  std::string datatype;

  static Term iri(std::string v) { return Term{TermKind::Iri, std::move(v), {}}; }
  static Term literal(std::string lexical, std::string datatype = {}) {
    return Term{TermKind::Literal, std::move(lexical), std::move(datatype)};
  }

  bool is_iri() const { return kind == TermKind::Iri; }
  bool is_literal() const { return kind == TermKind::Literal; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

/// Variable name without the leading '?'.
struct Variable {
  std::string name;

  friend bool operator==(const Variable&, const Variable&) = default;
  friend auto operator<=>(const Variable&, const Variable&) = default;
};

using PatternTerm = std::variant<Term, Variable>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;

  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

enum class CompareOp : std::uint8_t { Eq, Ne, Lt, Gt, Le, Ge };

struct Comparison {
  CompareOp op = CompareOp::Eq;
  PatternTerm lhs;
  PatternTerm rhs;

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// Value-semantic owning pointer, used to break the recursion in the
/// pattern tree.
template <class T>
class Box {
 public:
  Box() : ptr_(std::make_unique<T>()) {}
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

struct GroupPattern;

struct UnionPattern {
  std::vector<GroupPattern> branches;  // at least two

  friend bool operator==(const UnionPattern&, const UnionPattern&);
};

struct NotExistsFilter {
  Box<GroupPattern> pattern;

  friend bool operator==(const NotExistsFilter&, const NotExistsFilter&);
};

struct NestedGroup {
  Box<GroupPattern> pattern;

  friend bool operator==(const NestedGroup&, const NestedGroup&);
};

using PatternElement =
    std::variant<TriplePattern, UnionPattern, Comparison, NotExistsFilter, NestedGroup>;

/// Conjunction of elements. Filters scope over the whole group regardless of
/// where they appear in it.
struct GroupPattern {
  std::vector<PatternElement> elements;

  friend bool operator==(const GroupPattern&, const GroupPattern&);
};

enum class QueryForm : std::uint8_t { Select, Ask };

/// COUNT(*) when `argument` is empty.
struct CountAggregate {
  bool distinct = false;
  std::optional<Variable> argument;
  std::optional<Variable> alias;

  friend bool operator==(const CountAggregate&, const CountAggregate&) = default;
};

struct Query {
  QueryForm form = QueryForm::Select;
  bool distinct = false;
  std::vector<Variable> projection;
  std::optional<CountAggregate> count;
  GroupPattern where;

  bool is_count() const { return count.has_value(); }

  friend bool operator==(const Query&, const Query&) = default;
};

/// Canonical single-line serialization. `parse(to_sparql(q)) == q` for every
/// well-formed query.
std::string to_sparql(const Query& query);
std::string to_sparql(const GroupPattern& group);
std::string to_sparql(const Term& term);
std::string to_sparql(const PatternTerm& term);

std::string to_string(CompareOp op);

/// Variables mentioned anywhere in the group, including nested patterns.
void collect_variables(const GroupPattern& group, std::vector<std::string>& out);

/// Variables that a solution of the group can bind: those in triple patterns
/// outside NOT EXISTS.
void collect_bindable_variables(const GroupPattern& group, std::vector<std::string>& out);

}  // namespace sparqlrl::sparql
