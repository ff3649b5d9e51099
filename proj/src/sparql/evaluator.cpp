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

#include "sparqlrl/sparql/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace sparqlrl::sparql {

namespace {

using Solution = std::map<std::string, Term>;
using Bag = std::vector<Solution>;

std::optional<long long> as_integer(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t start = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (start == s.size()) return std::nullopt;
  long long value = 0;
  const char* first = s.data() + (s[0] == '+' ? 1 : 0);
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

template <class T>
bool apply(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

bool compare_terms(CompareOp op, const Term& a, const Term& b) {
  if (a.is_literal() && b.is_literal()) {
    auto x = as_integer(a.value);
    auto y = as_integer(b.value);
    if (x && y) return apply(op, *x, *y);
    return apply(op, a.value, b.value);
  }
  if (a.is_iri() && b.is_iri()) {
    if (op == CompareOp::Eq) return a.value == b.value;
    if (op == CompareOp::Ne) return a.value != b.value;
    return false;
  }
  // IRI against literal: never equal, not ordered.
  return op == CompareOp::Ne;
}

bool compatible(const Solution& a, const Solution& b) {
  const Solution& small = a.size() <= b.size() ? a : b;
  const Solution& large = a.size() <= b.size() ? b : a;
  for (const auto& [var, term] : small) {
    auto it = large.find(var);
    if (it != large.end() && it->second != term) return false;
  }
  return true;
}

Bag join(const Bag& left, const Bag& right) {
  Bag out;
  for (const auto& l : left) {
    for (const auto& r : right) {
      if (!compatible(l, r)) continue;
      Solution merged = l;
      merged.insert(r.begin(), r.end());
      out.push_back(std::move(merged));
    }
  }
  return out;
}

class Evaluator {
 public:
  explicit Evaluator(const TripleStore& store) : store_(store) {}

  Bag group(const GroupPattern& g, const Solution& subst) const {
    Bag bag{Solution{}};
    for (const auto& element : g.elements) {
      if (const auto* t = std::get_if<TriplePattern>(&element)) {
        bag = extend(bag, *t, subst);
      }
    }
    for (const auto& element : g.elements) {
      if (const auto* u = std::get_if<UnionPattern>(&element)) {
        Bag branches;
        for (const auto& branch : u->branches) {
          Bag b = group(branch, subst);
          branches.insert(branches.end(), b.begin(), b.end());
        }
        bag = join(bag, branches);
      } else if (const auto* n = std::get_if<NestedGroup>(&element)) {
        bag = join(bag, group(*n->pattern, subst));
      }
      if (bag.empty()) return bag;
    }
    std::vector<const PatternElement*> filters;
    for (const auto& element : g.elements) {
      if (std::holds_alternative<Comparison>(element) ||
          std::holds_alternative<NotExistsFilter>(element)) {
        filters.push_back(&element);
      }
    }
    if (filters.empty()) return bag;
    Bag kept;
    for (auto& sol : bag) {
      Solution scope = subst;
      scope.insert(sol.begin(), sol.end());
      bool ok = true;
      for (const auto* f : filters) {
        if (const auto* c = std::get_if<Comparison>(f)) {
          auto lhs = resolve(c->lhs, scope);
          auto rhs = resolve(c->rhs, scope);
          ok = lhs && rhs && compare_terms(c->op, *lhs, *rhs);
        } else {
          ok = group(*std::get<NotExistsFilter>(*f).pattern, scope).empty();
        }
        if (!ok) break;
      }
      if (ok) kept.push_back(std::move(sol));
    }
    return kept;
  }

 private:
  static std::optional<Term> resolve(const PatternTerm& term, const Solution& scope) {
    if (const auto* t = std::get_if<Term>(&term)) return *t;
    auto it = scope.find(std::get<Variable>(term).name);
    if (it == scope.end()) return std::nullopt;
    return it->second;
  }

  // Binds `pattern` term against `value`; false on conflict.
  static bool bind(const PatternTerm& pattern, const Term& value, const Solution& subst,
                   Solution& sol) {
    if (const auto* t = std::get_if<Term>(&pattern)) return *t == value;
    const std::string& name = std::get<Variable>(pattern).name;
    if (auto it = subst.find(name); it != subst.end()) return it->second == value;
    auto [it, inserted] = sol.emplace(name, value);
    return inserted || it->second == value;
  }

  Bag extend(const Bag& bag, const TriplePattern& pattern, const Solution& subst) const {
    Bag out;
    for (const auto& sol : bag) {
      Solution scope = subst;
      scope.insert(sol.begin(), sol.end());
      const auto s = resolve(pattern.subject, scope);
      const auto p = resolve(pattern.predicate, scope);
      const auto o = resolve(pattern.object, scope);
      std::span<const std::size_t> candidates;
      bool scan_all = false;
      if (s) {
        candidates = store_.with_subject(*s);
      } else if (o) {
        candidates = store_.with_object(*o);
      } else if (p) {
        candidates = store_.with_predicate(*p);
      } else {
        scan_all = true;
      }
      auto consider = [&](const Triple& triple) {
        Solution next = sol;
        if (bind(pattern.subject, triple.subject, scope, next) &&
            bind(pattern.predicate, triple.predicate, scope, next) &&
            bind(pattern.object, triple.object, scope, next)) {
          out.push_back(std::move(next));
        }
      };
      if (scan_all) {
        for (const auto& triple : store_.triples()) consider(triple);
      } else {
        for (std::size_t index : candidates) consider(store_.triples()[index]);
      }
    }
    return out;
  }

  const TripleStore& store_;
};

}  // namespace

AnswerSet evaluate(const Query& query, const TripleStore& store) {
  std::vector<std::string> bindable;
  collect_bindable_variables(query.where, bindable);
  auto require = [&](const Variable& v) {
    if (std::find(bindable.begin(), bindable.end(), v.name) == bindable.end()) {
      throw EvaluationError("variable ?" + v.name +
                            " is used in the result set but not assigned in WHERE");
    }
  };
  for (const auto& v : query.projection) require(v);
  if (query.count && query.count->argument) require(*query.count->argument);

  const Bag solutions = Evaluator(store).group(query.where, Solution{});

  if (query.form == QueryForm::Ask) return AnswerSet::boolean(!solutions.empty());

  if (query.count) {
    const CountAggregate& agg = *query.count;
    if (!agg.argument) {
      if (!agg.distinct) return AnswerSet::count(solutions.size());
      std::set<Solution> unique(solutions.begin(), solutions.end());
      return AnswerSet::count(unique.size());
    }
    std::uint64_t n = 0;
    std::set<Term> values;
    for (const auto& sol : solutions) {
      auto it = sol.find(agg.argument->name);
      if (it == sol.end()) continue;
      ++n;
      values.insert(it->second);
    }
    return AnswerSet::count(agg.distinct ? values.size() : n);
  }

  std::vector<std::string> vars;
  for (const auto& v : query.projection) vars.push_back(v.name);
  std::set<AnswerTuple> tuples;
  for (const auto& sol : solutions) {
    AnswerTuple tuple;
    tuple.reserve(vars.size());
    for (const auto& name : vars) {
      auto it = sol.find(name);
      tuple.push_back(it == sol.end() ? std::string() : it->second.value);
    }
    tuples.insert(std::move(tuple));
  }
  return AnswerSet::bindings(std::move(vars), std::move(tuples));
}

}  // namespace sparqlrl::sparql
