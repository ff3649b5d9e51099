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

#include "sparqlrl/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sparqlrl {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, int> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, int> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

double sentence_bleu(const std::vector<std::string>& candidate,
                     const std::vector<std::string>& reference, double epsilon) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const std::size_t max_n = std::min<std::size_t>(4, std::min(candidate.size(), reference.size()));
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    int matched = 0;
    for (const auto& [gram, count] : cand) {
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    const double total = static_cast<double>(candidate.size() - n + 1);
    const double numerator = matched > 0 ? matched : epsilon;
    log_sum += std::log(numerator / total);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

}  // namespace sparqlrl
