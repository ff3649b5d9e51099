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

#include "sparqlrl/tokenizer.hpp"

#include <cctype>

#include "sparqlrl/sparql/normalize.hpp"

namespace sparqlrl {

namespace {

bool is_punct(char c) {
  return c == '{' || c == '}' || c == '(' || c == ')' || c == '.' || c == ';';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Length of an IRI token starting at text[i] == '<', or 0 if none.
std::size_t iri_length(std::string_view text, std::size_t i) {
  for (std::size_t j = i + 1; j < text.size(); ++j) {
    if (text[j] == '>') return j > i + 1 ? j - i + 1 : 0;
    if (is_space(text[j]) || text[j] == '<' || text[j] == '{' || text[j] == '}') return 0;
  }
  return 0;
}

// Length of a quoted literal starting at text[i], or the rest of the text
// when unterminated.
std::size_t literal_length(std::string_view text, std::size_t i) {
  const char quote = text[i];
  for (std::size_t j = i + 1; j < text.size(); ++j) {
    if (text[j] == '\\') {
      ++j;
    } else if (text[j] == quote) {
      return j - i + 1;
    }
  }
  return text.size() - i;
}

}  // namespace

std::vector<std::string> tokenize_query(std::string_view raw) {
  const std::string text = sparql::normalize(raw);
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (is_space(c)) {
      flush();
      ++i;
    } else if (is_punct(c)) {
      flush();
      tokens.emplace_back(1, c);
      ++i;
    } else if (c == '<' && current.empty()) {
      if (std::size_t n = iri_length(text, i); n > 0) {
        tokens.emplace_back(text.substr(i, n));
        i += n;
      } else {
        current.push_back(c);
        ++i;
      }
    } else if ((c == '\'' || c == '"') && current.empty()) {
      const std::size_t n = literal_length(text, i);
      current.append(text, i, n);
      i += n;
      // Keeps a datatype or language suffix attached.
      if (text.compare(i, 3, "^^<") == 0) {
        if (std::size_t n = iri_length(text, i + 2); n > 0) {
          current.append(text, i, n + 2);
          i += n + 2;
        }
      } else if (i < text.size() && text[i] == '@') {
        current.push_back(text[i++]);
        while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '-')) {
          current.push_back(text[i++]);
        }
      }
      flush();
    } else {
      current.push_back(c);
      ++i;
    }
  }
  flush();
  return tokens;
}

std::size_t count_query_tokens(std::string_view text) { return tokenize_query(text).size(); }

}  // namespace sparqlrl
