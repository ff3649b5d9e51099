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

#include "sparqlrl/sparql/triple_store.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace sparqlrl::sparql {

TripleStore::TripleStore(std::vector<Triple> triples) : triples_(std::move(triples)) {
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    by_subject_[triples_[i].subject].push_back(i);
    by_predicate_[triples_[i].predicate].push_back(i);
    by_object_[triples_[i].object].push_back(i);
  }
}

bool TripleStore::contains(const Triple& t) const {
  return std::binary_search(triples_.begin(), triples_.end(), t);
}

std::span<const std::size_t> TripleStore::lookup(const Index& index, const Term& t) {
  auto it = index.find(t);
  if (it == index.end()) return {};
  return it->second;
}

std::span<const std::size_t> TripleStore::with_subject(const Term& t) const {
  return lookup(by_subject_, t);
}
std::span<const std::size_t> TripleStore::with_predicate(const Term& t) const {
  return lookup(by_predicate_, t);
}
std::span<const std::size_t> TripleStore::with_object(const Term& t) const {
  return lookup(by_object_, t);
}

namespace {

std::vector<Term> keys(const std::map<Term, std::vector<std::size_t>>& index) {
  std::vector<Term> out;
  out.reserve(index.size());
  for (const auto& [term, _] : index) out.push_back(term);
  return out;
}

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t number) : line_(line), number_(number) {}

  Triple parse() {
    Triple t;
    t.subject = iri("subject");
    t.predicate = iri("predicate");
    skip_space();
    if (pos_ < line_.size() && line_[pos_] == '"') {
      t.object = literal();
    } else {
      t.object = iri("object");
    }
    skip_space();
    if (pos_ >= line_.size() || line_[pos_] != '.') fail("expected terminating '.'");
    ++pos_;
    skip_space();
    if (pos_ < line_.size() && line_[pos_] != '#') fail("trailing characters after '.'");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw TripleParseError(number_, what); }

  void skip_space() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
  }

  Term iri(const char* position) {
    skip_space();
    if (pos_ >= line_.size() || line_[pos_] != '<') {
      fail(std::string("expected IRI in ") + position + " position");
    }
    const std::size_t end = line_.find('>', pos_);
    if (end == std::string_view::npos) fail("unterminated IRI");
    std::string body(line_.substr(pos_ + 1, end - pos_ - 1));
    if (body.empty() || std::any_of(body.begin(), body.end(), [](unsigned char c) {
          return std::isspace(c);
        })) {
      fail("malformed IRI");
    }
    pos_ = end + 1;
    return Term::iri(std::move(body));
  }

  Term literal() {
    std::string value;
    ++pos_;
    for (;;) {
      if (pos_ >= line_.size()) fail("unterminated literal");
      const char c = line_[pos_];
      if (c == '"') {
        ++pos_;
        break;
      }
      if (c == '\\') {
        if (pos_ + 1 >= line_.size()) fail("dangling escape");
        switch (line_[pos_ + 1]) {
          case 'n': value.push_back('\n'); break;
          case 'r': value.push_back('\r'); break;
          case 't': value.push_back('\t'); break;
          case '"': value.push_back('"'); break;
          case '\\': value.push_back('\\'); break;
          default: fail("unknown escape");
        }
        pos_ += 2;
        continue;
      }
      value.push_back(c);
      ++pos_;
    }
    std::string datatype;
    if (line_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      datatype = iri("datatype").value;
    } else if (pos_ < line_.size() && line_[pos_] == '@') {
      std::size_t end = pos_ + 1;
      while (end < line_.size() &&
             (std::isalnum(static_cast<unsigned char>(line_[end])) || line_[end] == '-')) {
        ++end;
      }
      if (end == pos_ + 1) fail("empty language tag");
      datatype = std::string(line_.substr(pos_, end - pos_));
      pos_ = end;
    }
    return Term::literal(std::move(value), std::move(datatype));
  }

  std::string_view line_;
  std::size_t number_;
  std::size_t pos_ = 0;
};

std::string escape_nt(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string term_nt(const Term& t) {
  if (t.is_iri()) return "<" + t.value + ">";
  std::string out = "\"" + escape_nt(t.value) + "\"";
  if (!t.datatype.empty()) out += t.datatype.front() == '@' ? t.datatype : "^^<" + t.datatype + ">";
  return out;
}

}  // namespace

std::vector<Term> TripleStore::subjects() const { return keys(by_subject_); }
std::vector<Term> TripleStore::predicates() const { return keys(by_predicate_); }
std::vector<Term> TripleStore::objects() const { return keys(by_object_); }

std::vector<Triple> parse_triples(std::istream& in) {
  std::vector<Triple> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    const auto first = view.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || view[first] == '#') continue;
    out.push_back(LineParser(view, number).parse());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TripleStore load_triples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open triple file " + path.string());
  return TripleStore(parse_triples(in));
}

std::string to_ntriples(const Triple& t) {
  return term_nt(t.subject) + " " + term_nt(t.predicate) + " " + term_nt(t.object) + " .";
}

}  // namespace sparqlrl::sparql
