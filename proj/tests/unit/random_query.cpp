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

#include "random_query.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace sparqlrl::testing {

using namespace sparqlrl::sparql;

namespace {

const char* kBase = "http://ex.org/";

Term node(int i) { return Term::iri(std::string(kBase) + "n" + std::to_string(i)); }
Term pred(int i) { return Term::iri(std::string(kBase) + "p" + std::to_string(i)); }
Term lit(int i) {
  static const char* values[] = {"1", "2", "10", "abc", "Abc"};
  return Term::literal(values[i % 5]);
}

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}
bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

Term random_object(std::mt19937_64& rng) {
  return coin(rng, 0.6) ? node(uniform(rng, 0, 4)) : lit(uniform(rng, 0, 4));
}

PatternTerm var_or(std::mt19937_64& rng, Term constant, double p_var) {
  static const char* names[] = {"x", "y", "z"};
  if (coin(rng, p_var)) return Variable{names[uniform(rng, 0, 2)]};
  return constant;
}

TriplePattern random_triple(std::mt19937_64& rng) {
  // Constants occasionally fall outside the store pools.
  TriplePattern t;
  t.subject = var_or(rng, node(uniform(rng, 0, 5)), 0.6);
  t.predicate = var_or(rng, pred(uniform(rng, 0, 2)), 0.2);
  t.object = var_or(rng, random_object(rng), 0.5);
  return t;
}

Comparison random_comparison(std::mt19937_64& rng) {
  static const CompareOp ops[] = {CompareOp::Eq, CompareOp::Ne, CompareOp::Lt,
                                  CompareOp::Gt, CompareOp::Le, CompareOp::Ge};
  Comparison c;
  c.op = ops[uniform(rng, 0, 5)];
  c.lhs = Variable{std::string(1, "xyz"[uniform(rng, 0, 2)])};
  c.rhs = coin(rng, 0.3) ? PatternTerm(Variable{std::string(1, "xyz"[uniform(rng, 0, 2)])})
                         : PatternTerm(random_object(rng));
  return c;
}

GroupPattern random_group(std::mt19937_64& rng, int depth) {
  GroupPattern g;
  const int n = uniform(rng, 1, 3);
  for (int i = 0; i < n; ++i) {
    const int kind = depth > 0 ? uniform(rng, 0, 9) : uniform(rng, 0, 6);
    if (kind <= 4) {
      g.elements.emplace_back(random_triple(rng));
    } else if (kind <= 6) {
      if (g.elements.empty()) g.elements.emplace_back(random_triple(rng));
      g.elements.emplace_back(random_comparison(rng));
    } else if (kind == 7) {
      UnionPattern u;
      const int branches = uniform(rng, 2, 3);
      for (int b = 0; b < branches; ++b) u.branches.push_back(random_group(rng, depth - 1));
      g.elements.emplace_back(std::move(u));
    } else if (kind == 8) {
      g.elements.emplace_back(NotExistsFilter{random_group(rng, depth - 1)});
    } else {
      g.elements.emplace_back(NestedGroup{random_group(rng, depth - 1)});
    }
  }
  return g;
}

}  // namespace

TripleStore random_store(std::mt19937_64& rng, std::size_t max_triples) {
  const std::size_t n = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(max_triples)));
  std::vector<Triple> triples;
  for (std::size_t i = 0; i < n; ++i) {
    triples.push_back(Triple{node(uniform(rng, 0, 4)), pred(uniform(rng, 0, 2)),
                             random_object(rng)});
  }
  return TripleStore(std::move(triples));
}

Query random_query(std::mt19937_64& rng, int max_depth) {
  Query q;
  q.where = random_group(rng, uniform(rng, 0, max_depth));
  std::vector<std::string> bindable;
  collect_bindable_variables(q.where, bindable);
  if (bindable.empty() || coin(rng, 0.25)) {
    q.form = QueryForm::Ask;
    return q;
  }
  q.form = QueryForm::Select;
  q.distinct = coin(rng, 0.5);
  if (coin(rng, 0.3)) {
    CountAggregate agg;
    agg.distinct = coin(rng, 0.5);
    if (coin(rng, 0.5)) agg.argument = Variable{bindable[uniform(rng, 0, static_cast<int>(bindable.size()) - 1)]};
    if (coin(rng, 0.7)) agg.alias = Variable{"c"};
    q.count = agg;
    return q;
  }
  std::shuffle(bindable.begin(), bindable.end(), rng);
  const int k = uniform(rng, 1, static_cast<int>(bindable.size()));
  for (int i = 0; i < k; ++i) q.projection.push_back(Variable{bindable[i]});
  return q;
}

}  // namespace sparqlrl::testing
