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

#include "sparqlrl/extraction.hpp"

#include <cctype>
#include <optional>
#include <vector>

namespace sparqlrl {

namespace {

constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kFence = "```";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_tag_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+';
}

// Start of a block's content after the opening fence at `open`: a language
// tag is skipped only when it is alone on the fence line.
std::size_t content_start(std::string_view text, std::size_t open) {
  std::size_t i = open + kFence.size();
  std::size_t j = i;
  while (j < text.size() && is_tag_char(text[j])) ++j;
  while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
  if (j < text.size() && text[j] == '\n') return j + 1;
  return i;
}

std::optional<std::string_view> last_fenced_block(std::string_view text) {
  std::optional<std::string_view> last;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t open = text.find(kFence, pos);
    if (open == std::string_view::npos) break;
    const std::size_t start = content_start(text, open);
    const std::size_t close = text.find(kFence, start);
    if (close == std::string_view::npos) break;
    last = text.substr(start, close - start);
    pos = close + kFence.size();
  }
  return last;
}

}  // namespace

Completion make_completion(std::string text, const TokenCounter& counter) {
  const std::size_t n = counter ? counter(text) : count_query_tokens(text);
  return Completion{std::move(text), n};
}

Extraction extract_query(std::string_view completion) {
  Extraction out;
  std::string_view suffix = completion;
  if (const auto pos = completion.rfind(kThinkClose); pos != std::string_view::npos) {
    out.had_think_close = true;
    suffix = completion.substr(pos + kThinkClose.size());
  }
  if (auto block = last_fenced_block(suffix)) {
    out.used_fenced_block = true;
    out.query_text = std::string(trim(*block));
  } else {
    out.query_text = std::string(trim(suffix));
  }
  return out;
}

}  // namespace sparqlrl
