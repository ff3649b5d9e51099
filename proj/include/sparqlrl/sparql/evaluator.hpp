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

#include <cstddef>
#include <stdexcept>
#include <string>

#include "sparqlrl/answer_set.hpp"
#include "sparqlrl/sparql/ast.hpp"
#include "sparqlrl/sparql/triple_store.hpp"

namespace sparqlrl::sparql {

/// Query is well-formed but cannot be answered (e.g. a projected variable
/// that the WHERE clause never binds).
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluates a query against the store.
///
/// Semantics: basic graph patterns are joined index-first; nested groups and
/// UNION branches are evaluated independently and joined on compatible
/// solutions (bag semantics). Filters apply to the whole enclosing group.
/// Comparisons are numeric when both operands are integer literals, otherwise
/// lexicographic on lexical forms; IRIs support only = and !=; unbound or
/// incomparable operands make the filter false. NOT EXISTS substitutes the
/// current solution into its pattern. COUNT counts (distinct) solutions or
/// bound values of its argument.
AnswerSet evaluate(const Query& query, const TripleStore& store);

/// Store is too large for exhaustive enumeration.
class BruteForceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Test oracle with the same semantics as evaluate(): every variable of a
/// basic graph pattern is enumerated over all store terms that can occupy its
/// positions and each candidate assignment is checked directly against the
/// store. Throws BruteForceLimitError when any triple position has more than
/// `max_terms_per_position` distinct terms.
AnswerSet brute_force_evaluate(const Query& query, const TripleStore& store,
                               std::size_t max_terms_per_position = 10);

}  // namespace sparqlrl::sparql
