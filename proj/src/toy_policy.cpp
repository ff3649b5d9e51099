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

#include "sparqlrl/toy_policy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "sparqlrl/tokenizer.hpp"

namespace sparqlrl {

namespace {

const std::vector<std::string> kVocabulary = {
    "<eos>", "<think>", "</think>", "step",   "SELECT", "DISTINCT", "WHERE", "ASK",
    "{",     "}",       ".",        "(",      ")",      "COUNT",    "AS",    "UNION",
    "FILTER", "NOT",    "EXISTS",   ">",      "<",      "?x",       "?y",    "?c",
    "<E0>",  "<E1>",    "<E2>",     "<R0>",   "<R1>",   "<Q0>",
};

constexpr int kFirstEntity = 24;
constexpr int kMaxEntities = 3;
constexpr int kFirstRelation = 27;
constexpr int kMaxRelations = 2;
constexpr int kYear = 29;

constexpr int kBiasFeature = 0;
constexpr int kCotFeature = 1;
constexpr int kEntityCountFeature = 2;    // 4 one-hot slots
constexpr int kRelationCountFeature = 6;  // 3 one-hot slots
constexpr int kYearFeature = 9;
constexpr int kFirstWordFeature = 10;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Question with entity labels blanked out (case-insensitive).
std::string strip_labels(std::string_view question, const std::vector<EntityHint>& entities) {
  std::string q = lower(question);
  for (const auto& e : entities) {
    const std::string label = lower(e.label);
    if (label.empty()) continue;
    for (std::size_t pos = q.find(label); pos != std::string::npos; pos = q.find(label, pos)) {
      q.replace(pos, label.size(), std::string(label.size(), ' '));
    }
  }
  return q;
}

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    const bool year = current.size() == 4 &&
                      std::all_of(current.begin(), current.end(),
                                  [](unsigned char c) { return std::isdigit(c); });
    if (!current.empty() && !year) out.push_back(current);
    current.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace

std::optional<std::string> question_year(std::string_view question) {
  for (std::size_t i = 0; i + 4 <= question.size(); ++i) {
    auto digit = [&](std::size_t k) {
      return k < question.size() && std::isdigit(static_cast<unsigned char>(question[k]));
    };
    if (digit(i) && digit(i + 1) && digit(i + 2) && digit(i + 3) && !digit(i + 4) &&
        (i == 0 || !digit(i - 1))) {
      return std::string(question.substr(i, 4));
    }
  }
  return std::nullopt;
}

ToyPolicy::ToyPolicy(ToyPolicyConfig config, std::vector<std::string> words)
    : config_(config), words_(std::move(words)) {
  if (config_.context_order < 1 || config_.context_order > 4) {
    throw std::invalid_argument("context_order must be in [1, 4]");
  }
  if (config_.slot_states < 1) throw std::invalid_argument("slot_states must be positive");
  std::sort(words_.begin(), words_.end());
  words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  const std::size_t v = kVocabulary.size();
  contexts_ = 1;
  for (int i = 0; i < config_.context_order; ++i) contexts_ *= v + 1;
  contexts_ *= static_cast<std::size_t>(config_.slot_states);
  table_a_size_ = contexts_ * v;
  const std::size_t table_b_size =
      (v + 1) * static_cast<std::size_t>(config_.slot_states) * feature_count() * v;
  params_.assign(table_a_size_ + table_b_size, 0.0);
}

std::vector<std::string> ToyPolicy::fit_words(const std::vector<QAInstance>& instances) {
  std::set<std::string> words;
  for (const auto& inst : instances) {
    for (auto& w : words_of(strip_labels(inst.question, inst.entities))) words.insert(w);
  }
  return {words.begin(), words.end()};
}

const std::vector<std::string>& ToyPolicy::vocabulary() { return kVocabulary; }

int ToyPolicy::token_id(std::string_view name) {
  auto it = std::find(kVocabulary.begin(), kVocabulary.end(), name);
  if (it == kVocabulary.end()) throw OutOfVocabulary("token '" + std::string(name) + "'");
  return static_cast<int>(it - kVocabulary.begin());
}

std::size_t ToyPolicy::vocab_size() const { return kVocabulary.size(); }

std::string ToyPolicy::token_name(int token) const {
  return kVocabulary.at(static_cast<std::size_t>(token));
}

std::size_t ToyPolicy::feature_count() const { return kFirstWordFeature + words_.size(); }

EncodedPrompt ToyPolicy::encode(const PolicyPrompt& prompt) const {
  EncodedPrompt enc;
  enc.features.push_back(kBiasFeature);
  if (prompt.cot) enc.features.push_back(kCotFeature);
  const int ne = std::min<int>(static_cast<int>(prompt.entities.size()), kMaxEntities);
  const int nr = std::min<int>(static_cast<int>(prompt.relations.size()), kMaxRelations);
  enc.features.push_back(kEntityCountFeature + ne);
  enc.features.push_back(kRelationCountFeature + nr);
  const std::string stripped = strip_labels(prompt.question, prompt.entities);
  const bool has_year = question_year(stripped).has_value();
  if (has_year) enc.features.push_back(kYearFeature);
  std::set<int> word_features;
  for (const auto& w : words_of(stripped)) {
    auto it = std::lower_bound(words_.begin(), words_.end(), w);
    if (it != words_.end() && *it == w) {
      word_features.insert(kFirstWordFeature + static_cast<int>(it - words_.begin()));
    }
  }
  enc.features.insert(enc.features.end(), word_features.begin(), word_features.end());

  enc.allowed.assign(kVocabulary.size(), 1);
  for (int i = 0; i < kMaxEntities; ++i) enc.allowed[kFirstEntity + i] = i < ne;
  for (int j = 0; j < kMaxRelations; ++j) enc.allowed[kFirstRelation + j] = j < nr;
  enc.allowed[kYear] = has_year;
  return enc;
}

EncodedPrompt ToyPolicy::encode_unconditional() const {
  EncodedPrompt enc;
  enc.features = {kBiasFeature};
  enc.allowed.assign(kVocabulary.size(), 1);
  return enc;
}

int ToyPolicy::slot(std::span<const int> prefix) const {
  int n = 0;
  for (int t : prefix) n += (t >= kFirstEntity && t < kFirstEntity + kMaxEntities);
  return std::min(n, config_.slot_states - 1);
}

std::size_t ToyPolicy::context_index(std::span<const int> prefix) const {
  const std::size_t bos = kVocabulary.size();
  std::size_t index = 0;
  for (int k = config_.context_order; k >= 1; --k) {
    const std::size_t token = prefix.size() >= static_cast<std::size_t>(k)
                                  ? static_cast<std::size_t>(prefix[prefix.size() - k])
                                  : bos;
    index = index * (bos + 1) + token;
  }
  return index * static_cast<std::size_t>(config_.slot_states) +
         static_cast<std::size_t>(slot(prefix));
}

std::size_t ToyPolicy::table_b_offset(int prev, int s, int feature) const {
  const std::size_t v = kVocabulary.size();
  return table_a_size_ +
         ((static_cast<std::size_t>(prev) * static_cast<std::size_t>(config_.slot_states) +
           static_cast<std::size_t>(s)) *
              feature_count() +
          static_cast<std::size_t>(feature)) *
             v;
}

void ToyPolicy::logits(const EncodedPrompt& prompt, std::span<const int> prefix,
                       std::span<double> out) const {
  const std::size_t v = kVocabulary.size();
  const double* a = params_.data() + context_index(prefix) * v;
  std::copy(a, a + v, out.begin());
  const int prev = prefix.empty() ? static_cast<int>(v) : prefix.back();
  const int s = slot(prefix);
  for (int f : prompt.features) {
    const double* b = params_.data() + table_b_offset(prev, s, f);
    for (std::size_t t = 0; t < v; ++t) out[t] += b[t];
  }
  for (std::size_t t = 0; t < v; ++t) {
    if (!prompt.allowed[t]) out[t] = -std::numeric_limits<double>::infinity();
  }
}

void ToyPolicy::add_logit_gradient(const EncodedPrompt& prompt, std::span<const int> prefix,
                                   std::span<const double> dlogits, double scale,
                                   std::span<double> grad) const {
  const std::size_t v = kVocabulary.size();
  double* a = grad.data() + context_index(prefix) * v;
  for (std::size_t t = 0; t < v; ++t) {
    if (prompt.allowed[t]) a[t] += scale * dlogits[t];
  }
  const int prev = prefix.empty() ? static_cast<int>(v) : prefix.back();
  const int s = slot(prefix);
  for (int f : prompt.features) {
    double* b = grad.data() + table_b_offset(prev, s, f);
    for (std::size_t t = 0; t < v; ++t) {
      if (prompt.allowed[t]) b[t] += scale * dlogits[t];
    }
  }
}

std::unique_ptr<Policy> ToyPolicy::clone() const { return std::make_unique<ToyPolicy>(*this); }

std::string ToyPolicy::detokenize(const PolicyPrompt& prompt, std::span<const int> tokens) const {
  const auto year = question_year(strip_labels(prompt.question, prompt.entities));
  std::string out;
  for (int t : tokens) {
    if (t == eos_token()) break;
    std::string piece;
    if (t >= kFirstEntity && t < kFirstEntity + kMaxEntities) {
      const auto i = static_cast<std::size_t>(t - kFirstEntity);
      piece = i < prompt.entities.size() ? "<" + prompt.entities[i].uri + ">" : token_name(t);
    } else if (t >= kFirstRelation && t < kFirstRelation + kMaxRelations) {
      const auto j = static_cast<std::size_t>(t - kFirstRelation);
      piece = j < prompt.relations.size() ? "<" + prompt.relations[j].uri + ">" : token_name(t);
    } else if (t == kYear) {
      piece = year ? "'" + *year + "'" : token_name(t);
    } else {
      piece = token_name(t);
    }
    if (!out.empty()) out.push_back(' ');
    out += piece;
  }
  return out;
}

std::vector<int> ToyPolicy::tokenize_target(const PolicyPrompt& prompt,
                                            std::string_view text) const {
  const auto year = question_year(strip_labels(prompt.question, prompt.entities));
  std::vector<int> out;
  for (const auto& tok : tokenize_query(text)) {
    if (auto it = std::find(kVocabulary.begin(), kVocabulary.end(), tok); it != kVocabulary.end()) {
      out.push_back(static_cast<int>(it - kVocabulary.begin()));
      continue;
    }
    int id = -1;
    if (tok.size() > 2 && tok.front() == '<' && tok.back() == '>') {
      const std::string uri = tok.substr(1, tok.size() - 2);
      for (std::size_t i = 0; i < prompt.entities.size() && i < kMaxEntities && id < 0; ++i) {
        if (prompt.entities[i].uri == uri) id = kFirstEntity + static_cast<int>(i);
      }
      for (std::size_t j = 0; j < prompt.relations.size() && j < kMaxRelations && id < 0; ++j) {
        if (prompt.relations[j].uri == uri) id = kFirstRelation + static_cast<int>(j);
      }
    } else if (year && (tok == "'" + *year + "'" || tok == "\"" + *year + "\"")) {
      id = kYear;
    }
    if (id < 0) throw OutOfVocabulary("token '" + tok + "' is outside the policy vocabulary");
    out.push_back(id);
  }
  out.push_back(eos_token());
  return out;
}

std::vector<int> ToyPolicy::tokenize_pointer_line(std::string_view line) const {
  std::vector<int> out;
  for (const auto& tok : tokenize_query(line)) out.push_back(token_id(tok));
  out.push_back(eos_token());
  return out;
}

void ToyPolicy::randomize(std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (double& p : params_) p = normal(rng);
}

nlohmann::json ToyPolicy::to_json() const {
  nlohmann::json nonzero = nlohmann::json::array();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i] != 0.0) nonzero.push_back({i, params_[i]});
  }
  return {{"format", "sparqlrl-toy-policy"},
          {"version", 1},
          {"context_order", config_.context_order},
          {"slot_states", config_.slot_states},
          {"vocabulary", kVocabulary},
          {"words", words_},
          {"parameter_count", params_.size()},
          {"nonzero_parameters", nonzero}};
}

ToyPolicy ToyPolicy::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "sparqlrl-toy-policy" || j.at("version") != 1) {
      throw std::invalid_argument("not a toy policy file");
    }
    if (j.at("vocabulary").get<std::vector<std::string>>() != kVocabulary) {
      throw std::invalid_argument("toy policy vocabulary mismatch");
    }
    ToyPolicy policy(ToyPolicyConfig{j.at("context_order").get<int>(), j.at("slot_states").get<int>()},
                     j.at("words").get<std::vector<std::string>>());
    if (j.at("parameter_count").get<std::size_t>() != policy.params_.size()) {
      throw std::invalid_argument("toy policy parameter count mismatch");
    }
    for (const auto& entry : j.at("nonzero_parameters")) {
      const auto i = entry.at(0).get<std::size_t>();
      if (i >= policy.params_.size()) throw std::invalid_argument("parameter index out of range");
      policy.params_[i] = entry.at(1).get<double>();
    }
    return policy;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed toy policy: ") + e.what());
  }
}

void ToyPolicy::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << to_json().dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

ToyPolicy ToyPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read policy " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace sparqlrl
