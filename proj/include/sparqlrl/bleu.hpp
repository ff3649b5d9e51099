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

#include <string>
#include <vector>

namespace sparqlrl {

/// Sentence-level BLEU of `candidate` against one `reference`.
///
/// Uses n-grams up to min(4, shorter length) with uniform weights, clipped
/// counts and the standard brevity penalty. A zero match count for some
/// order is replaced by `epsilon` before taking the geometric mean. Returns 0
/// when either sequence is empty.
double sentence_bleu(const std::vector<std::string>& candidate,
                     const std::vector<std::string>& reference, double epsilon = 0.1);

}  // namespace sparqlrl
