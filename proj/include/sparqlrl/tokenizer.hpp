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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace sparqlrl {

/// Query tokenizer shared by the similarity and length rewards.
///
/// The text is whitespace-normalized, then split on whitespace with each of
/// `{ } ( ) . ;` emitted as its own token. `<...>` IRIs and quoted literals
/// are kept whole, so dots inside IRIs and spaces inside literals do not
/// split. Case is preserved.
std::vector<std::string> tokenize_query(std::string_view text);

std::size_t count_query_tokens(std::string_view text);

/// Token counting hook for length rewards (a model tokenizer in LLM mode).
using TokenCounter = std::function<std::size_t(std::string_view)>;

}  // namespace sparqlrl
