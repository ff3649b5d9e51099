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

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "sparqlrl/sparql/evaluator.hpp"

namespace sparqlrl::sparql {

namespace {

// Written independently of evaluator.cpp: assignments are enumerated, never
// looked up through the store indexes.

using Assignment = std::map<std::string, Term>;
using Multiset = std::vector<Assignment>;

bool integer_lexical(const std::string& s, long long& out) {
  std::size_t i = 0;
  bool negative = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    negative = s[i] == '-';
    ++i;
  }
  if (i == s.size() || s.size() - i > 18) return false;
  long long v = 0;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = negative ? -v : v;
  return true;
}

int three_way(const Term& a, const Term& b) {
  long long x = 0;
  long long y = 0;
  if (integer_lexical(a.value, x) && integer_lexical(b.value, y)) return x < y ? -1 : (x > y);
  const int c = a.value.compare(b.value);
  return c < 0 ? -1 : (c > 0);
}

bool comparison_holds(CompareOp op, const std::optional<Term>& a, const std::optional<Term>& b) {
  if (!a || !b) return false;
  if (a->kind != b->kind) return op == CompareOp::Ne;
  if (a->is_iri()) {
    if (op == CompareOp::Eq) return a->value == b->value;
    if (op == CompareOp::Ne) return a->value != b->value;
    return false;
  }
  const int c = three_way(*a, *b);
  switch (op) {
    case CompareOp::Eq: return c == 0;
    case CompareOp::Ne: return c != 0;
    case CompareOp::Lt: return c < 0;
    case CompareOp::Gt: return c > 0;
    case CompareOp::Le: return c <= 0;
    case CompareOp::Ge: return c >= 0;
  }
  return false;
}

class Enumerator {
 public:
  Enumerator(const TripleStore& store, std::size_t limit) : store_(store) {
    subjects_ = store.subjects();
    predicates_ = store.predicates();
    objects_ = store.objects();
    if (subjects_.size() > limit || predicates_.size() > limit || objects_.size() > limit) {
      throw BruteForceLimitError("store exceeds " + std::to_string(limit) +
                                 " distinct terms per position");
    }
  }

  Multiset group(const GroupPattern& g, const Assignment& fixed) const {
    std::vector<const TriplePattern*> triples;
    for (const auto& e : g.elements) {
      if (const auto* t = std::get_if<TriplePattern>(&e)) triples.push_back(t);
    }
    Multiset result = enumerate(triples, fixed);

    for (const auto& e : g.elements) {
      Multiset other;
      if (const auto* u = std::get_if<UnionPattern>(&e)) {
        for (const auto& branch : u->branches) {
          Multiset part = group(branch, fixed);
          other.insert(other.end(), part.begin(), part.end());
        }
      } else if (const auto* n = std::get_if<NestedGroup>(&e)) {
        other = group(*n->pattern, fixed);
      } else {
        continue;
      }
      Multiset joined;
      for (const auto& a : result) {
        for (const auto& b : other) {
          bool ok = true;
          for (const auto& [k, v] : b) {
            auto it = a.find(k);
            if (it != a.end() && it->second != v) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          Assignment m = b;
          for (const auto& kv : a) m[kv.first] = kv.second;
          joined.push_back(std::move(m));
        }
      }
      result = std::move(joined);
    }

    Multiset kept;
    for (const auto& a : result) {
      Assignment scope = fixed;
      for (const auto& kv : a) scope[kv.first] = kv.second;
      bool ok = true;
      for (const auto& e : g.elements) {
        if (const auto* c = std::get_if<Comparison>(&e)) {
          ok = comparison_holds(c->op, value(c->lhs, scope), value(c->rhs, scope));
        } else if (const auto* n = std::get_if<NotExistsFilter>(&e)) {
          ok = group(*n->pattern, scope).empty();
        }
        if (!ok) break;
      }
      if (ok) kept.push_back(a);
    }
    return kept;
  }

 private:
  static std::optional<Term> value(const PatternTerm& t, const Assignment& scope) {
    if (std::holds_alternative<Term>(t)) return std::get<Term>(t);
    auto it = scope.find(std::get<Variable>(t).name);
    if (it == scope.end()) return std::nullopt;
    return it->second;
  }

  // Every total assignment of the free variables of `triples` that makes all
  // of them store triples.
  Multiset enumerate(const std::vector<const TriplePattern*>& triples,
                     const Assignment& fixed) const {
    std::vector<std::string> vars;
    std::map<std::string, std::vector<Term>> domain;
    auto note = [&](const PatternTerm& t, const std::vector<Term>& candidates) {
      if (!std::holds_alternative<Variable>(t)) return;
      const std::string& name = std::get<Variable>(t).name;
      if (fixed.count(name)) return;
      auto it = domain.find(name);
      if (it == domain.end()) {
        vars.push_back(name);
        domain.emplace(name, candidates);
        return;
      }
      std::vector<Term> narrowed;
      std::set_intersection(it->second.begin(), it->second.end(), candidates.begin(),
                            candidates.end(), std::back_inserter(narrowed));
      it->second = std::move(narrowed);
    };
    for (const auto* t : triples) {
      note(t->subject, subjects_);
      note(t->predicate, predicates_);
      note(t->object, objects_);
    }

    Multiset out;
    std::vector<std::size_t> odometer(vars.size(), 0);
    for (const auto& v : vars) {
      if (domain[v].empty()) return out;
    }
    for (;;) {
      Assignment a;
      for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = domain[vars[i]][odometer[i]];
      Assignment scope = fixed;
      for (const auto& kv : a) scope[kv.first] = kv.second;
      bool ok = true;
      for (const auto* t : triples) {
        Triple ground{*value(t->subject, scope), *value(t->predicate, scope),
                      *value(t->object, scope)};
        if (!store_.contains(ground)) {
          ok = false;
          break;
        }
      }
      if (ok) out.push_back(std::move(a));

      std::size_t i = 0;
      while (i < vars.size()) {
        if (++odometer[i] < domain[vars[i]].size()) break;
        odometer[i] = 0;
        ++i;
      }
      if (i == vars.size()) break;
    }
    return out;
  }

  const TripleStore& store_;
  std::vector<Term> subjects_;
  std::vector<Term> predicates_;
  std::vector<Term> objects_;
};

}  // namespace

AnswerSet brute_force_evaluate(const Query& query, const TripleStore& store,
                               std::size_t max_terms_per_position) {
  std::vector<std::string> bindable;
  collect_bindable_variables(query.where, bindable);
  auto bound = [&](const std::string& name) {
    return std::find(bindable.begin(), bindable.end(), name) != bindable.end();
  };
  for (const auto& v : query.projection) {
    if (!bound(v.name)) throw EvaluationError("unbound projected variable ?" + v.name);
  }
  if (query.count && query.count->argument && !bound(query.count->argument->name)) {
    throw EvaluationError("unbound COUNT argument ?" + query.count->argument->name);
  }

  Enumerator enumerator(store, max_terms_per_position);
  const Multiset all = enumerator.group(query.where, Assignment{});

  if (query.form == QueryForm::Ask) return AnswerSet::boolean(!all.empty());

  if (query.count) {
    if (!query.count->argument) {
      if (!query.count->distinct) return AnswerSet::count(all.size());
      std::set<Assignment> distinct(all.begin(), all.end());
      return AnswerSet::count(distinct.size());
    }
    const std::string& name = query.count->argument->name;
    std::vector<Term> values;
    for (const auto& a : all) {
      if (auto it = a.find(name); it != a.end()) values.push_back(it->second);
    }
    if (query.count->distinct) {
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
    }
    return AnswerSet::count(values.size());
  }

  std::vector<std::string> vars;
  for (const auto& v : query.projection) vars.push_back(v.name);
  std::set<AnswerTuple> tuples;
  for (const auto& a : all) {
    AnswerTuple row;
    for (const auto& name : vars) {
      auto it = a.find(name);
      row.push_back(it != a.end() ? it->second.value : "");
    }
    tuples.insert(row);
  }
  return AnswerSet::bindings(vars, tuples);
}

}  // namespace sparqlrl::sparql
