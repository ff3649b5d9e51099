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

#include "sparqlrl/sparql/ast.hpp"

#include <algorithm>

namespace sparqlrl::sparql {

bool operator==(const UnionPattern& a, const UnionPattern& b) { return a.branches == b.branches; }
bool operator==(const NotExistsFilter& a, const NotExistsFilter& b) { return a.pattern == b.pattern; }
bool operator==(const NestedGroup& a, const NestedGroup& b) { return a.pattern == b.pattern; }
bool operator==(const GroupPattern& a, const GroupPattern& b) { return a.elements == b.elements; }

std::string to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
  }
  return "=";
}

namespace {

std::string escape_literal(const std::string& lexical) {
  std::string out;
  out.reserve(lexical.size() + 2);
  out.push_back('\'');
  for (char c : lexical) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

void append_element(std::string& out, const PatternElement& element);

void append_group(std::string& out, const GroupPattern& group) {
  out += "{";
  for (std::size_t i = 0; i < group.elements.size(); ++i) {
    out += i == 0 ? " " : " . ";
    append_element(out, group.elements[i]);
  }
  out += " }";
}

struct ElementWriter {
  std::string& out;

  void operator()(const TriplePattern& t) const {
    out += to_sparql(t.subject);
    out += ' ';
    out += to_sparql(t.predicate);
    out += ' ';
    out += to_sparql(t.object);
  }
  void operator()(const UnionPattern& u) const {
    for (std::size_t i = 0; i < u.branches.size(); ++i) {
      if (i > 0) out += " UNION ";
      append_group(out, u.branches[i]);
    }
  }
  void operator()(const Comparison& c) const {
    out += "FILTER ( ";
    out += to_sparql(c.lhs);
    out += ' ';
    out += to_string(c.op);
    out += ' ';
    out += to_sparql(c.rhs);
    out += " )";
  }
  void operator()(const NotExistsFilter& f) const {
    out += "FILTER NOT EXISTS ";
    append_group(out, *f.pattern);
  }
  void operator()(const NestedGroup& g) const { append_group(out, *g.pattern); }
};

void append_element(std::string& out, const PatternElement& element) {
  std::visit(ElementWriter{out}, element);
}

void collect_term(const PatternTerm& term, std::vector<std::string>& out) {
  if (const auto* var = std::get_if<Variable>(&term)) {
    if (std::find(out.begin(), out.end(), var->name) == out.end()) out.push_back(var->name);
  }
}

}  // namespace

std::string to_sparql(const Term& term) {
  if (term.is_iri()) return "<" + term.value + ">";
  std::string out = escape_literal(term.value);
  if (!term.datatype.empty()) {
    if (term.datatype.front() == '@') {
      out += term.datatype;
    } else {
      out += "^^<" + term.datatype + ">";
    }
  }
  return out;
}

std::string to_sparql(const PatternTerm& term) {
  if (const auto* var = std::get_if<Variable>(&term)) return "?" + var->name;
  return to_sparql(std::get<Term>(term));
}

std::string to_sparql(const GroupPattern& group) {
  std::string out;
  append_group(out, group);
  return out;
}

std::string to_sparql(const Query& query) {
  std::string out;
  if (query.form == QueryForm::Ask) {
    out = "ASK ";
  } else {
    out = "SELECT ";
    if (query.distinct) out += "DISTINCT ";
    if (query.count) {
      out += "(COUNT(";
      if (query.count->distinct) out += "DISTINCT ";
      out += query.count->argument ? "?" + query.count->argument->name : std::string("*");
      out += ")";
      if (query.count->alias) out += " AS ?" + query.count->alias->name;
      out += ") ";
    } else {
      for (const auto& var : query.projection) out += "?" + var.name + " ";
    }
    out += "WHERE ";
  }
  append_group(out, query.where);
  return out;
}

void collect_variables(const GroupPattern& group, std::vector<std::string>& out) {
  for (const auto& element : group.elements) {
    if (const auto* t = std::get_if<TriplePattern>(&element)) {
      collect_term(t->subject, out);
      collect_term(t->predicate, out);
      collect_term(t->object, out);
    } else if (const auto* u = std::get_if<UnionPattern>(&element)) {
      for (const auto& branch : u->branches) collect_variables(branch, out);
    } else if (const auto* c = std::get_if<Comparison>(&element)) {
      collect_term(c->lhs, out);
      collect_term(c->rhs, out);
    } else if (const auto* n = std::get_if<NotExistsFilter>(&element)) {
      collect_variables(*n->pattern, out);
    } else if (const auto* g = std::get_if<NestedGroup>(&element)) {
      collect_variables(*g->pattern, out);
    }
  }
}

void collect_bindable_variables(const GroupPattern& group, std::vector<std::string>& out) {
  for (const auto& element : group.elements) {
    if (const auto* t = std::get_if<TriplePattern>(&element)) {
      collect_term(t->subject, out);
      collect_term(t->predicate, out);
      collect_term(t->object, out);
    } else if (const auto* u = std::get_if<UnionPattern>(&element)) {
      for (const auto& branch : u->branches) collect_bindable_variables(branch, out);
    } else if (const auto* g = std::get_if<NestedGroup>(&element)) {
      collect_bindable_variables(*g->pattern, out);
    }
  }
}

}  // namespace sparqlrl::sparql
