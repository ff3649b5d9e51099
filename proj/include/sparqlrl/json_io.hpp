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

#include "json.hpp"

#include "sparqlrl/answer_set.hpp"
#include "sparqlrl/endpoint.hpp"

namespace sparqlrl {

/// {"kind": "boolean", "value": true}
/// {"kind": "count", "value": 3}
/// {"kind": "bindings", "vars": ["x"], "tuples": [["a"], ["b"]]}
nlohmann::json answer_set_to_json(const AnswerSet& answers);

/// Inverse of answer_set_to_json. Throws std::invalid_argument on a malformed
/// document.
AnswerSet answer_set_from_json(const nlohmann::json& j);

/// {"status": "ok", "answers": {...}} or {"status": "timeout", "message": "..."}
nlohmann::json outcome_to_json(const ExecutionOutcome& outcome);
ExecutionOutcome outcome_from_json(const nlohmann::json& j);

}  // namespace sparqlrl
