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
#include <string_view>

namespace sparqlrl::sparql {

/// Collapses every run of whitespace to a single space and trims both ends.
/// All other bytes are left untouched, so the result is not a parse-level
/// canonical form. Idempotent.
std::string normalize(std::string_view text);

}  // namespace sparqlrl::sparql
