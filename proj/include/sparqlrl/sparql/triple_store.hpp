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
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparqlrl/sparql/ast.hpp"

namespace sparqlrl::sparql {

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Malformed line in an N-Triples file.
class TripleParseError : public std::runtime_error {
 public:
  TripleParseError(std::size_t line, const std::string& detail)
      : std::runtime_error("line " + std::to_string(line) + ": " + detail), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Immutable, duplicate-free set of triples with per-position indexes.
class TripleStore {
 public:
  TripleStore() = default;
  explicit TripleStore(std::vector<Triple> triples);

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  const std::vector<Triple>& triples() const { return triples_; }
  bool contains(const Triple& t) const;

  /// Candidate triples for a pattern position. Empty span when the term does
  /// not occur in that position.
  std::span<const std::size_t> with_subject(const Term& t) const;
  std::span<const std::size_t> with_predicate(const Term& t) const;
  std::span<const std::size_t> with_object(const Term& t) const;

  /// Distinct terms occurring in each position.
  std::vector<Term> subjects() const;
  std::vector<Term> predicates() const;
  std::vector<Term> objects() const;

 private:
  using Index = std::map<Term, std::vector<std::size_t>>;
  static std::span<const std::size_t> lookup(const Index& index, const Term& t);

  std::vector<Triple> triples_;
  Index by_subject_;
  Index by_predicate_;
  Index by_object_;
};

/// N-Triples subset: `<s> <p> <o> .` or `<s> <p> "lex"[^^<dt>|@lang] .`, one
/// triple per line. Blank lines and `#` comments are skipped; duplicates are
/// dropped.
std::vector<Triple> parse_triples(std::istream& in);
TripleStore load_triples(const std::filesystem::path& path);

/// One N-Triples line (without trailing newline).
std::string to_ntriples(const Triple& t);

}  // namespace sparqlrl::sparql
