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

#include <string_view>

namespace sparqlrl {

// Byte-identical copies of assets/prompts/*.txt.

inline constexpr std::string_view kSystemPromptCot = R"(Your task is to generate a syntactically and semantically correct SPARQL query that answers a given natural language question, using only the provided entities and relations.

Please follow these instructions:
- carefully analyze the given question, pay special attention to negations (not, etc.).
- Think step by step, reasoning through the transformation from question to query.
- Enclose your detailed reasoning in <think> ... </think> tags.
- Output the final SPARQL query - without any extra explanation or formatting.

Query Generation Rules:
- Only use the provided entities and relations; do not invent or infer additional ones.
- Use all provided entities and relations in the query.
- Do not use prefixes; write all URIs in full.
- By default, use SELECT DISTINCT in your queries, unless the context clearly requires otherwise.
- For yes/no questions, always use the ASK keyword to obtain a boolean result
- Carefully consider whether the answer should be the subject or object in each relevant triple pattern.
- Always use single quotes for literals

Example output format:
<think> Step-by-step reasoning here. </think> SPARQL query here)";

inline constexpr std::string_view kSystemPromptDirect = R"(Your task is to generate a syntactically and semantically correct SPARQL query that answers a given natural language question, using only the provided entities and relations.

Please follow these instructions:
- carefully analyze the given question, pay special attention to negations (not, etc.).
- Output the SPARQL query directly, without any reasoning.
- Output the final SPARQL query - without any extra explanation or formatting.

Query Generation Rules:
- Only use the provided entities and relations; do not invent or infer additional ones.
- Use all provided entities and relations in the query.
- Do not use prefixes; write all URIs in full.
- By default, use SELECT DISTINCT in your queries, unless the context clearly requires otherwise.
- For yes/no questions, always use the ASK keyword to obtain a boolean result
- Carefully consider whether the answer should be the subject or object in each relevant triple pattern.
- Always use single quotes for literals

Example output format:
SPARQL query here)";

inline constexpr std::string_view kUserPromptTemplate = R"(Generate a SPARQL query to answer the following question.

Question: {question}
Relevant Entities: {entities}
Relevant Relations: {relations})";

}  // namespace sparqlrl
