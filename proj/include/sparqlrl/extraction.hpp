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
#include <string>
#include <string_view>

#include "sparqlrl/tokenizer.hpp"

namespace sparqlrl {

struct Completion {
  std::string text;
  /// Completion tokens only.
  std::size_t token_count = 0;
};

/// Completion whose token count comes from `counter` (the query tokenizer
/// when empty).
Completion make_completion(std::string text, const TokenCounter& counter = {});

struct Extraction {
  std::string query_text;
  bool had_think_close = false;
  bool used_fenced_block = false;

  friend bool operator==(const Extraction&, const Extraction&) = default;
};

/// Recovers the final query from a completion: keep the text after the last
/// `</think>`, then take the interior of the last complete ``` fenced block
/// (any language tag) or, if there is none, the whole suffix. The result is
/// whitespace-trimmed. An opening fence without a closing one is ignored.
Extraction extract_query(std::string_view completion);

}  // namespace sparqlrl
