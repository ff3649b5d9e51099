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

#include "sparqlrl/sparql/parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <vector>

namespace sparqlrl::sparql {

ParseError::ParseError(std::size_t offset, std::string expected, const std::string& detail)
    : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + detail +
                         (expected.empty() ? std::string() : " (expected " + expected + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

enum class Tok {
  End,
  Iri,
  Var,
  Literal,
  Integer,
  Word,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Dot,
  Semicolon,
  Comma,
  Star,
  Op,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;      // IRI body, variable name, literal lexical, word, operator
  std::string datatype;  // literals only
  std::size_t offset = 0;
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}
bool is_iri_char(char c) {
  if (is_space(c)) return false;
  switch (c) {
    case '<': case '>': case '"': case '{': case '}': case '|': case '^': case '`': case '\\':
      return false;
    default:
      return true;
  }
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    for (;;) {
      skip_space();
      Token tok = next();
      tokens.push_back(tok);
      if (tok.kind == Tok::End) break;
    }
    return tokens;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      if (is_space(text_[pos_])) {
        ++pos_;
      } else if (text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token make(Tok kind, std::size_t start, std::string text = {}) {
    Token t;
    t.kind = kind;
    t.offset = start;
    t.text = std::move(text);
    return t;
  }

  std::optional<std::string> try_iri() {
    std::size_t end = pos_ + 1;
    while (end < text_.size() && is_iri_char(text_[end])) ++end;
    if (end < text_.size() && text_[end] == '>') {
      std::string body(text_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return body;
    }
    return std::nullopt;
  }

  Token next() {
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) return make(Tok::End, start);
    const char c = text_[pos_];
    switch (c) {
      case '{': ++pos_; return make(Tok::LBrace, start, "{");
      case '}': ++pos_; return make(Tok::RBrace, start, "}");
      case '(': ++pos_; return make(Tok::LParen, start, "(");
      case ')': ++pos_; return make(Tok::RParen, start, ")");
      case '.': ++pos_; return make(Tok::Dot, start, ".");
      case ';': ++pos_; return make(Tok::Semicolon, start, ";");
      case ',': ++pos_; return make(Tok::Comma, start, ",");
      case '*': ++pos_; return make(Tok::Star, start, "*");
      case '=': ++pos_; return make(Tok::Op, start, "=");
      case '!':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
          pos_ += 2;
          return make(Tok::Op, start, "!=");
        }
        throw ParseError(start, "'!='", "unexpected '!'");
      case '>':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
          pos_ += 2;
          return make(Tok::Op, start, ">=");
        }
        ++pos_;
        return make(Tok::Op, start, ">");
      case '<': {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
          pos_ += 2;
          return make(Tok::Op, start, "<=");
        }
        if (auto iri = try_iri()) return make(Tok::Iri, start, std::move(*iri));
        ++pos_;
        return make(Tok::Op, start, "<");
      }
      case '?':
      case '$': {
        std::size_t end = pos_ + 1;
        while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                      text_[end] == '_')) {
          ++end;
        }
        if (end == pos_ + 1) throw ParseError(start, "variable name", "empty variable name");
        Token t = make(Tok::Var, start, std::string(text_.substr(pos_ + 1, end - pos_ - 1)));
        pos_ = end;
        return t;
      }
      case '\'':
      case '"':
        return literal(start, c);
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '-' || c == '+') && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      std::size_t end = pos_ + 1;
      while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
      Token t = make(Tok::Integer, start, std::string(text_.substr(pos_, end - pos_)));
      pos_ = end;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':') {
      std::size_t end = pos_;
      while (end < text_.size() && (is_word_char(text_[end]) || text_[end] == ':')) ++end;
      std::string word(text_.substr(pos_, end - pos_));
      if (word.find(':') != std::string::npos) {
        throw ParseError(start, "full IRI in angle brackets",
                         "prefixed name '" + word + "' is not allowed; write IRIs in full");
      }
      pos_ = end;
      return make(Tok::Word, start, std::move(word));
    }
    throw ParseError(start, "", std::string("unexpected character '") + c + "'");
  }

  Token literal(std::size_t start, char quote) {
    std::string value;
    std::size_t p = pos_ + 1;
    for (;;) {
      if (p >= text_.size()) throw ParseError(start, "closing quote", "unterminated literal");
      const char ch = text_[p];
      if (ch == quote) {
        ++p;
        break;
      }
      if (ch == '\\') {
        if (p + 1 >= text_.size()) throw ParseError(p, "escape sequence", "dangling backslash");
        const char e = text_[p + 1];
        switch (e) {
          case 'n': value.push_back('\n'); break;
          case 'r': value.push_back('\r'); break;
          case 't': value.push_back('\t'); break;
          case '\\': value.push_back('\\'); break;
          case '\'': value.push_back('\''); break;
          case '"': value.push_back('"'); break;
          default: throw ParseError(p, "escape sequence", "unknown escape");
        }
        p += 2;
        continue;
      }
      value.push_back(ch);
      ++p;
    }
    pos_ = p;
    Token t = make(Tok::Literal, start, std::move(value));
    if (pos_ + 1 < text_.size() && text_[pos_] == '^' && text_[pos_ + 1] == '^') {
      pos_ += 2;
      if (pos_ >= text_.size() || text_[pos_] != '<') {
        throw ParseError(pos_, "datatype IRI", "prefixed datatype is not allowed");
      }
      auto iri = try_iri();
      if (!iri) throw ParseError(pos_, "datatype IRI", "malformed datatype IRI");
      t.datatype = std::move(*iri);
    } else if (pos_ < text_.size() && text_[pos_] == '@') {
      std::size_t end = pos_ + 1;
      while (end < text_.size() && is_word_char(text_[end])) ++end;
      if (end == pos_ + 1) throw ParseError(pos_, "language tag", "empty language tag");
      t.datatype = std::string(text_.substr(pos_, end - pos_));
      pos_ = end;
    }
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Query query() {
    Query q;
    if (is_word("PREFIX") || is_word("BASE")) {
      throw ParseError(peek().offset, "SELECT or ASK",
                       "PREFIX/BASE declarations are not allowed; write IRIs in full");
    }
    if (accept_word("ASK")) {
      q.form = QueryForm::Ask;
      accept_word("WHERE");
      q.where = group();
    } else if (accept_word("SELECT")) {
      q.form = QueryForm::Select;
      q.distinct = accept_word("DISTINCT");
      if (peek().kind == Tok::LParen) {
        q.count = count_aggregate();
      } else {
        while (peek().kind == Tok::Var) q.projection.push_back(Variable{take().text});
        if (q.projection.empty()) {
          throw ParseError(peek().offset, "projected variable or (COUNT(...))",
                           "empty projection");
        }
      }
      accept_word("WHERE");
      q.where = group();
    } else {
      throw ParseError(peek().offset, "SELECT or ASK", "unknown query form");
    }
    if (peek().kind != Tok::End) {
      throw ParseError(peek().offset, "end of query", "trailing input '" + peek().text + "'");
    }
    check_projection(q);
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  Token take() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  bool is_word(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::Word && upper(t.text) == kw;
  }
  bool accept_word(std::string_view kw) {
    if (!is_word(kw)) return false;
    ++pos_;
    return true;
  }
  void expect_word(std::string_view kw) {
    if (!accept_word(kw)) {
      throw ParseError(peek().offset, std::string(kw), "unexpected '" + peek().text + "'");
    }
  }
  void expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) {
      throw ParseError(peek().offset, std::string(what),
                       peek().kind == Tok::End ? "unexpected end of query"
                                               : "unexpected '" + peek().text + "'");
    }
    ++pos_;
  }

  CountAggregate count_aggregate() {
    expect(Tok::LParen, "'('");
    expect_word("COUNT");
    expect(Tok::LParen, "'('");
    CountAggregate agg;
    agg.distinct = accept_word("DISTINCT");
    if (peek().kind == Tok::Star) {
      ++pos_;
    } else if (peek().kind == Tok::Var) {
      agg.argument = Variable{take().text};
    } else {
      throw ParseError(peek().offset, "variable or '*'", "malformed COUNT argument");
    }
    expect(Tok::RParen, "')'");
    if (accept_word("AS")) {
      if (peek().kind != Tok::Var) throw ParseError(peek().offset, "variable", "malformed alias");
      agg.alias = Variable{take().text};
    }
    expect(Tok::RParen, "')'");
    return agg;
  }

  GroupPattern group() {
    expect(Tok::LBrace, "'{'");
    GroupPattern g;
    for (;;) {
      const Token& t = peek();
      if (t.kind == Tok::RBrace) {
        ++pos_;
        break;
      }
      if (t.kind == Tok::End) throw ParseError(t.offset, "'}'", "unterminated group");
      if (t.kind == Tok::Dot) {
        // Separators between elements are optional after non-triple elements.
        if (g.elements.empty()) throw ParseError(t.offset, "pattern", "unexpected '.'");
        ++pos_;
        continue;
      }
      if (t.kind == Tok::LBrace) {
        group_or_union(g);
      } else if (is_word("FILTER")) {
        filter(g);
      } else {
        triples_same_subject(g);
      }
    }
    return g;
  }

  void group_or_union(GroupPattern& g) {
    GroupPattern first = group();
    if (!is_word("UNION")) {
      g.elements.emplace_back(NestedGroup{std::move(first)});
      return;
    }
    UnionPattern u;
    u.branches.push_back(std::move(first));
    while (accept_word("UNION")) u.branches.push_back(group());
    g.elements.emplace_back(std::move(u));
  }

  void filter(GroupPattern& g) {
    expect_word("FILTER");
    if (accept_word("NOT")) {
      expect_word("EXISTS");
      g.elements.emplace_back(NotExistsFilter{group()});
      return;
    }
    expect(Tok::LParen, "'(' or NOT EXISTS");
    Comparison c;
    c.lhs = operand();
    if (peek().kind != Tok::Op) {
      throw ParseError(peek().offset, "comparison operator", "malformed FILTER expression");
    }
    const std::string op = take().text;
    if (op == "=") c.op = CompareOp::Eq;
    else if (op == "!=") c.op = CompareOp::Ne;
    else if (op == "<") c.op = CompareOp::Lt;
    else if (op == ">") c.op = CompareOp::Gt;
    else if (op == "<=") c.op = CompareOp::Le;
    else c.op = CompareOp::Ge;
    c.rhs = operand();
    expect(Tok::RParen, "')'");
    g.elements.emplace_back(std::move(c));
  }

  PatternTerm operand() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Var: return Variable{take().text};
      case Tok::Iri: return Term::iri(take().text);
      case Tok::Literal: {
        Token lit = take();
        return Term::literal(std::move(lit.text), std::move(lit.datatype));
      }
      case Tok::Integer: return Term::literal(take().text);
      default:
        throw ParseError(t.offset, "variable, IRI or literal",
                         t.kind == Tok::End ? "unexpected end of query"
                                            : "unexpected '" + t.text + "'");
    }
  }

  PatternTerm subject_or_object() { return operand(); }

  PatternTerm predicate() {
    const Token& t = peek();
    if (t.kind == Tok::Var) return Variable{take().text};
    if (t.kind == Tok::Iri) return Term::iri(take().text);
    if (t.kind == Tok::Word && t.text == "a") {
      ++pos_;
      return Term::iri(std::string(kRdfType));
    }
    throw ParseError(t.offset, "predicate IRI or variable",
                     t.kind == Tok::End ? "unexpected end of query"
                                        : "unexpected '" + t.text + "'");
  }

  void triples_same_subject(GroupPattern& g) {
    const Token& start = peek();
    if (start.kind == Tok::Word) {
      throw ParseError(start.offset, "triple pattern, group, or FILTER",
                       "unexpected keyword '" + start.text + "'");
    }
    PatternTerm subject = subject_or_object();
    for (;;) {
      PatternTerm pred = predicate();
      for (;;) {
        PatternTerm object = subject_or_object();
        g.elements.emplace_back(TriplePattern{subject, pred, std::move(object)});
        if (peek().kind != Tok::Comma) break;
        ++pos_;
      }
      if (peek().kind != Tok::Semicolon) break;
      ++pos_;
      if (peek().kind == Tok::Dot || peek().kind == Tok::RBrace) break;
    }
    const Token& after = peek();
    if (after.kind != Tok::Dot && after.kind != Tok::RBrace && after.kind != Tok::LBrace &&
        !is_word("FILTER")) {
      throw ParseError(after.offset, "'.' or '}'",
                       after.kind == Tok::End ? "unexpected end of query"
                                              : "unexpected '" + after.text + "'");
    }
  }

  static void check_projection(const Query& q) {
    std::vector<std::string> bindable;
    collect_bindable_variables(q.where, bindable);
    auto require = [&](const Variable& v) {
      if (std::find(bindable.begin(), bindable.end(), v.name) == bindable.end()) {
        throw ParseError(0, "", "projected variable ?" + v.name + " is not bound in WHERE");
      }
    };
    for (const auto& v : q.projection) require(v);
    if (q.count && q.count->argument) require(*q.count->argument);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Query parse(std::string_view text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.query();
}

}  // namespace sparqlrl::sparql
