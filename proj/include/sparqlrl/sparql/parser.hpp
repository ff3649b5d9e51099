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
#include <string_view>

#include "sparqlrl/sparql/ast.hpp"

namespace sparqlrl::sparql {

/// Syntax error in the accepted dialect. `offset` is the byte offset into the
/// query text where the problem was detected.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string expected, const std::string& detail);

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

/// Parses the restricted dialect:
///
///   SELECT [DISTINCT] ?v... WHERE { ... }
///   SELECT [DISTINCT] (COUNT([DISTINCT] ?v|*) [AS ?c]) WHERE { ... }
///   ASK [WHERE] { ... }
///
/// Group patterns hold triple patterns (with `;` and `,` shorthand), nested
/// groups, UNION, FILTER(comparison) and FILTER NOT EXISTS. IRIs must be
/// written in full; prefixed names and PREFIX/BASE declarations are rejected.
/// Keywords are case-insensitive.
Query parse(std::string_view text);

}  // namespace sparqlrl::sparql
