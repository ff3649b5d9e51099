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

#include "sparqlrl/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "sparqlrl/json_io.hpp"
#include "sparqlrl/parallel.hpp"
#include "sparqlrl/prompt_templates.hpp"
#include "sparqlrl/query_cache.hpp"

namespace sparqlrl {

namespace {

std::string squash(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// Single pass over the template so substituted text is never rescanned.
std::string substitute(std::string_view tmpl,
                       const std::vector<std::pair<std::string_view, std::string>>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    bool matched = false;
    if (tmpl[pos] == '{') {
      for (const auto& [name, value] : values) {
        if (tmpl.compare(pos + 1, name.size(), name) == 0 &&
            pos + 1 + name.size() < tmpl.size() && tmpl[pos + 1 + name.size()] == '}') {
          out += value;
          pos += name.size() + 2;
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(tmpl[pos++]);
  }
  return out;
}

void check_uri(const std::string& uri, const std::string& field) {
  if (uri.empty()) throw std::invalid_argument(field + ": empty uri");
  if (std::any_of(uri.begin(), uri.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw std::invalid_argument(field + ": uri contains whitespace");
  }
}

// Required string member, or nested {"<inner>": "..."} as in DBLP-QuAD.
std::string text_field(const nlohmann::json& j, const char* name, const char* inner) {
  auto it = j.find(name);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + name + "'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_object() && it->contains(inner) && (*it)[inner].is_string()) {
    return (*it)[inner].get<std::string>();
  }
  throw std::invalid_argument(std::string("field '") + name + "' must be a string");
}

template <class T>
T optional_field(const nlohmann::json& j, const char* name, T fallback) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

std::string to_string(QueryType type) {
  switch (type) {
    case QueryType::SingleFact: return "Single Fact";
    case QueryType::MultipleFacts: return "Multiple Facts";
    case QueryType::Boolean: return "Boolean";
    case QueryType::Negation: return "Negation";
    case QueryType::DoubleNegation: return "Double Negation";
    case QueryType::DoubleIntent: return "Double Intent";
    case QueryType::Union: return "Union";
    case QueryType::Count: return "Count";
    case QueryType::SuperlativeComparative: return "Superlative/Comparative";
    case QueryType::Disambiguation: return "Disambiguation";
  }
  return "unknown";
}

std::string short_label(QueryType type) {
  switch (type) {
    case QueryType::SingleFact: return "SF";
    case QueryType::MultipleFacts: return "Multi";
    case QueryType::Boolean: return "Bool";
    case QueryType::Negation: return "Neg";
    case QueryType::DoubleNegation: return "D-Neg";
    case QueryType::DoubleIntent: return "D-Int";
    case QueryType::Union: return "Un";
    case QueryType::Count: return "Cnt";
    case QueryType::SuperlativeComparative: return "Sup+Comp";
    case QueryType::Disambiguation: return "Disamb";
  }
  return "?";
}

QueryType query_type_from_string(std::string_view text) {
  const std::string key = squash(text);
  for (QueryType t : kAllQueryTypes) {
    if (squash(to_string(t)) == key) return t;
  }
  if (key == "multifact" || key == "multiplefact") return QueryType::MultipleFacts;
  if (key == "superlativeorcomparative") return QueryType::SuperlativeComparative;
  throw std::invalid_argument("unknown query_type '" + std::string(text) + "'");
}

std::string to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

Split split_from_string(std::string_view text) {
  for (Split s : {Split::Train, Split::Valid, Split::Test}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown split '" + std::string(text) + "'");
}

DatasetError::DatasetError(std::string source, std::size_t line, const std::string& detail)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " +
                         detail),
      line_(line) {}

QAInstance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  QAInstance inst;
  inst.id = text_field(j, "id", "id");
  inst.question = text_field(j, "question", "string");
  inst.query_type = query_type_from_string(text_field(j, "query_type", "type"));
  if (j.contains("query") && !j["query"].is_null()) {
    inst.gold_query = text_field(j, "query", "sparql");
  }
  inst.template_id = optional_field<std::string>(j, "template_id", "");
  inst.is_temporal = optional_field<bool>(j, "temporal", false);
  inst.is_heldout = optional_field<bool>(j, "held_out", false);

  for (const auto& e : optional_field<nlohmann::json>(j, "entities", nlohmann::json::array())) {
    EntityHint hint{optional_field<std::string>(e, "uri", ""),
                    optional_field<std::string>(e, "label", "")};
    check_uri(hint.uri, "entities");
    if (hint.label.empty()) throw std::invalid_argument("entities: empty label for " + hint.uri);
    inst.entities.push_back(std::move(hint));
  }
  for (const auto& r : optional_field<nlohmann::json>(j, "relations", nlohmann::json::array())) {
    RelationHint hint{optional_field<std::string>(r, "uri", ""),
                      optional_field<std::string>(r, "label", ""),
                      optional_field<std::string>(r, "domain", ""),
                      optional_field<std::string>(r, "range", ""),
                      optional_field<std::string>(r, "comment", "")};
    check_uri(hint.uri, "relations");
    inst.relations.push_back(std::move(hint));
  }
  if (auto it = j.find("answer"); it != j.end() && !it->is_null()) {
    inst.gold_answers = answer_set_from_json(*it);
  }
  if (auto it = j.find("materialization_error"); it != j.end() && !it->is_null()) {
    inst.materialization_error = it->get<std::string>();
  }
  return inst;
}

nlohmann::json instance_to_json(const QAInstance& inst) {
  nlohmann::json j;
  j["id"] = inst.id;
  j["question"] = inst.question;
  if (inst.gold_query) j["query"] = *inst.gold_query;
  j["query_type"] = to_string(inst.query_type);
  j["template_id"] = inst.template_id;
  j["temporal"] = inst.is_temporal;
  j["held_out"] = inst.is_heldout;
  j["entities"] = nlohmann::json::array();
  for (const auto& e : inst.entities) j["entities"].push_back({{"uri", e.uri}, {"label", e.label}});
  j["relations"] = nlohmann::json::array();
  for (const auto& r : inst.relations) {
    j["relations"].push_back({{"uri", r.uri},
                              {"label", r.label},
                              {"domain", r.domain},
                              {"range", r.range},
                              {"comment", r.comment}});
  }
  if (inst.gold_answers) j["answer"] = answer_set_to_json(*inst.gold_answers);
  if (inst.materialization_error) j["materialization_error"] = *inst.materialization_error;
  return j;
}

std::vector<QAInstance> parse_dataset(std::istream& in, const std::string& source) {
  std::vector<QAInstance> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError(source, number, std::string("malformed JSON: ") + e.what());
    }
    try {
      out.push_back(instance_from_json(j));
    } catch (const std::exception& e) {
      throw DatasetError(source, number, e.what());
    }
  }
  return out;
}

std::vector<QAInstance> read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(path.string(), 0, "cannot open file");
  return parse_dataset(in, path.string());
}

std::vector<QAInstance> load_dataset(const std::filesystem::path& dir, Split split) {
  return read_dataset_file(dir / (to_string(split) + ".jsonl"));
}

void write_dataset(std::ostream& out, const std::vector<QAInstance>& instances) {
  for (const auto& inst : instances) out << instance_to_json(inst).dump() << '\n';
}

void write_dataset_file(const std::filesystem::path& path,
                        const std::vector<QAInstance>& instances) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    write_dataset(out, instances);
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string render_entities(const std::vector<EntityHint>& entities) {
  std::string out = "[";
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (i) out += ", ";
    out += "<" + entities[i].uri + "> (" + entities[i].label + ")";
  }
  return out + "]";
}

std::string render_relations(const std::vector<RelationHint>& relations) {
  std::string out = "[";
  for (std::size_t i = 0; i < relations.size(); ++i) {
    const auto& r = relations[i];
    if (i) out += ", ";
    out += "<" + r.uri + "> (" + r.label + ")";
    std::vector<std::string> schema;
    if (!r.domain.empty()) schema.push_back("domain: " + r.domain);
    if (!r.range.empty()) schema.push_back("range: " + r.range);
    if (!r.comment.empty()) schema.push_back("comment: " + r.comment);
    if (!schema.empty()) {
      out += " [";
      for (std::size_t k = 0; k < schema.size(); ++k) out += (k ? "; " : "") + schema[k];
      out += "]";
    }
  }
  return out + "]";
}

Prompt render_prompt(const QAInstance& instance, bool cot) {
  std::string user = substitute(kUserPromptTemplate,
                                {{"question", instance.question},
                                 {"entities", render_entities(instance.entities)},
                                 {"relations", render_relations(instance.relations)}});
  return Prompt{std::string(cot ? kSystemPromptCot : kSystemPromptDirect), std::move(user)};
}

std::vector<QAInstance> materialize_gold_answers(std::vector<QAInstance> instances,
                                                 ExecutionBackend& backend, QueryCache* cache,
                                                 unsigned threads, Timeout timeout) {
  for (const auto& inst : instances) {
    if (!inst.gold_query) {
      throw std::invalid_argument("instance " + inst.id + " has no gold query");
    }
  }
  backend.check_available();
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    QAInstance& inst = instances[i];
    ExecutionOutcome outcome = cache ? cache->cached_execute(*inst.gold_query, backend, timeout)
                                     : backend.execute(*inst.gold_query, timeout);
    if (outcome.ok()) {
      inst.gold_answers = std::move(outcome.answers);
      inst.materialization_error.reset();
    } else {
      inst.gold_answers.reset();
      inst.materialization_error = to_string(outcome.status) + ": " + outcome.message;
    }
  });
  return instances;
}

}  // namespace sparqlrl
