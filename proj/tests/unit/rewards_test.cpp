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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "sparqlrl/bleu.hpp"
#include "sparqlrl/extraction.hpp"
#include "sparqlrl/query_cache.hpp"
#include "sparqlrl/rewards.hpp"
#include "sparqlrl/tokenizer.hpp"

namespace sparqlrl {
namespace {

// ---- extraction ----

TEST(Extraction, GoldenCases) {
  std::ifstream in(std::string(SPARQLRL_TEST_DATA_DIR) + "/extraction_cases.jsonl");
  ASSERT_TRUE(in);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    auto c = nlohmann::json::parse(line);
    Extraction e = extract_query(c["input"].get<std::string>());
    EXPECT_EQ(e.query_text, c["query_text"].get<std::string>()) << "case " << n;
    EXPECT_EQ(e.had_think_close, c["had_think_close"].get<bool>()) << "case " << n;
    EXPECT_EQ(e.used_fenced_block, c["used_fenced_block"].get<bool>()) << "case " << n;
    ++n;
  }
  EXPECT_EQ(n, 30);
}

TEST(Extraction, NeverReturnsThinkClose) {
  std::mt19937_64 rng(1);
  const std::vector<std::string> parts = {"<think>", "</think>", "```", "```sparql\n", "ASK { }",
                                          " ", "\n", "x", "</think", "think>"};
  for (int i = 0; i < 3000; ++i) {
    std::string s;
    const int k = std::uniform_int_distribution<int>(0, 8)(rng);
    for (int j = 0; j < k; ++j) {
      s += parts[std::uniform_int_distribution<std::size_t>(0, parts.size() - 1)(rng)];
    }
    Extraction e = extract_query(s);
    ASSERT_EQ(e.query_text.find("</think>"), std::string::npos) << s;
    if (s.find("<think>") == std::string::npos && s.find("</think>") == std::string::npos &&
        s.find("```") == std::string::npos) {
      std::string t = s;
      t.erase(0, t.find_first_not_of(" \n"));
      t.erase(t.find_last_not_of(" \n") + 1);
      ASSERT_EQ(e.query_text, s.find_first_not_of(" \n") == std::string::npos ? "" : t);
    }
  }
}

// ---- tokenizer ----

TEST(Tokenizer, SplitsPunctuationKeepsIrisAndLiterals) {
  EXPECT_EQ(tokenize_query("SELECT DISTINCT ?x WHERE {?x <https://dblp.org/rdf/schema#title> "
                           "'Deep Learning'.}"),
            (std::vector<std::string>{"SELECT", "DISTINCT", "?x", "WHERE", "{", "?x",
                                      "<https://dblp.org/rdf/schema#title>", "'Deep Learning'",
                                      ".", "}"}));
  EXPECT_EQ(tokenize_query("SELECT (COUNT(DISTINCT ?x) AS ?c)"),
            (std::vector<std::string>{"SELECT", "(", "COUNT", "(", "DISTINCT", "?x", ")", "AS",
                                      "?c", ")"}));
  EXPECT_EQ(tokenize_query("FILTER(?y < 2015)"),
            (std::vector<std::string>{"FILTER", "(", "?y", "<", "2015", ")"}));
  EXPECT_EQ(tokenize_query("\"2015\"^^<http://www.w3.org/2001/XMLSchema#gYear>;"),
            (std::vector<std::string>{"\"2015\"^^<http://www.w3.org/2001/XMLSchema#gYear>", ";"}));
  EXPECT_TRUE(tokenize_query("  \n ").empty());
}

// ---- BLEU ----

// Reference implementation kept deliberately plain: n-grams as joined
// strings, counts in std::map, clipped matches, BP, add-epsilon on zeros.
double oracle_bleu(const std::vector<std::string>& c, const std::vector<std::string>& r,
                   double eps) {
  if (c.empty() || r.empty()) return 0;
  std::size_t N = std::min<std::size_t>({4, c.size(), r.size()});
  double s = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    std::map<std::string, int> cc, rc;
    for (std::size_t i = 0; i + n <= c.size(); ++i) {
      std::string g;
      for (std::size_t k = 0; k < n; ++k) g += c[i + k] + '\x1f';
      cc[g]++;
    }
    for (std::size_t i = 0; i + n <= r.size(); ++i) {
      std::string g;
      for (std::size_t k = 0; k < n; ++k) g += r[i + k] + '\x1f';
      rc[g]++;
    }
    double m = 0;
    for (auto& [g, k] : cc) m += std::min(k, rc[g]);
    double total = static_cast<double>(c.size() - n + 1);
    s += std::log((m > 0 ? m : eps) / total) / static_cast<double>(N);
  }
  double bp = c.size() > r.size() ? 1.0 : std::exp(1.0 - double(r.size()) / double(c.size()));
  return bp * std::exp(s);
}

TEST(Bleu, IdenticalIsOneEmptyIsZero) {
  auto q = tokenize_query("SELECT DISTINCT ?x WHERE { <a> <p> ?x }");
  EXPECT_DOUBLE_EQ(sentence_bleu(q, q), 1.0);
  EXPECT_DOUBLE_EQ(sentence_bleu({}, q), 0.0);
  EXPECT_DOUBLE_EQ(r_sim("", "ASK { }"), 0.0);
  EXPECT_DOUBLE_EQ(r_sim("ASK", "ASK"), 1.0);
}

TEST(Bleu, TwentyTokenSingleSubstitutionClosedForm) {
  std::vector<std::string> ref;
  for (int i = 0; i < 20; ++i) ref.push_back("t" + std::to_string(i));
  auto cand = ref;
  cand[10] = "other";
  // Lost n-grams: 1 unigram, 2 bigrams, 3 trigrams, 4 four-grams.
  const double expected = std::pow(19.0 / 20 * 17.0 / 19 * 15.0 / 18 * 13.0 / 17, 0.25);
  EXPECT_NEAR(sentence_bleu(cand, ref), expected, 1e-12);
  EXPECT_NEAR(expected, 0.8579, 1e-4);
}

TEST(Bleu, SubstitutedQueryMatchesOracle) {
  const std::string gold =
      "SELECT DISTINCT ?x WHERE { ?x <https://dblp.org/rdf/schema#authoredBy> "
      "<https://dblp.org/pid/1> . ?x <https://dblp.org/rdf/schema#yearOfPublication> ?y . "
      "FILTER ( ?y > '2015' ) }";
  auto g = tokenize_query(gold);
  ASSERT_EQ(g.size(), 20u);
  auto c = g;
  c[7] = "<https://dblp.org/pid/2>";
  const double expected = oracle_bleu(c, g, 0.1);
  std::string joined;
  for (const auto& t : c) joined += t + " ";
  EXPECT_NEAR(r_sim(joined, gold), expected, 1e-12);
  EXPECT_LT(expected, 1.0);
}

TEST(Bleu, RandomSequencesMatchOracle) {
  std::mt19937_64 rng(4);
  const std::vector<std::string> vocab = {"a", "b", "c", "{", "}", "?x"};
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::string> c, r;
    const int nc = std::uniform_int_distribution<int>(0, 12)(rng);
    const int nr = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int k = 0; k < nc; ++k) c.push_back(vocab[rng() % vocab.size()]);
    for (int k = 0; k < nr; ++k) r.push_back(vocab[rng() % vocab.size()]);
    const double b = sentence_bleu(c, r);
    ASSERT_NEAR(b, oracle_bleu(c, r, 0.1), 1e-12);
    ASSERT_GE(b, 0.0);
    ASSERT_LE(b, 1.0 + 1e-12);
  }
}

TEST(Bleu, WhitespaceInvariant) {
  const std::string q = "SELECT ?x WHERE { ?x <p> <o> . ?x <q> 'a b' }";
  EXPECT_DOUBLE_EQ(r_sim(q, "SELECT ?x WHERE {\n  ?x <p> <o> .\n  ?x <q> 'a b'\n}"), 1.0);
}

// ---- answer F1 and components ----

TEST(AnswerF1, Examples) {
  auto ab = AnswerSet::bindings({"x"}, {{"a"}, {"b"}});
  auto a = AnswerSet::bindings({"x"}, {{"a"}});
  EXPECT_DOUBLE_EQ(answer_f1(ab, ab), 1.0);
  EXPECT_DOUBLE_EQ(answer_f1(a, ab), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::bindings({"x"}, {{"x"}, {"y"}}),
                             AnswerSet::bindings({"x"}, {{"y"}, {"z"}})),
                   0.5);
  EXPECT_DOUBLE_EQ(answer_f1(a, AnswerSet::bindings({"x"}, {{"c"}})), 0.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::boolean(true), AnswerSet::boolean(true)), 1.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::boolean(true), AnswerSet::boolean(false)), 0.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::count(3), AnswerSet::count(3)), 1.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::count(3), AnswerSet::count(4)), 0.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::boolean(true), a), 0.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::count(1), a), 0.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::bindings({"x"}, {}), AnswerSet::bindings({"y"}, {})), 1.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::bindings({"x"}, {{" a "}}), a), 1.0);
  EXPECT_DOUBLE_EQ(answer_f1(AnswerSet::bindings({"x", "y"}, {{"a", ""}}), a), 0.0);
}

TEST(AnswerF1, SymmetricOnRandomSets) {
  std::mt19937_64 rng(8);
  auto random_set = [&] {
    std::set<AnswerTuple> t;
    const int n = std::uniform_int_distribution<int>(0, 5)(rng);
    for (int i = 0; i < n; ++i) t.insert({std::string(1, static_cast<char>('a' + rng() % 6))});
    return AnswerSet::bindings({"x"}, t);
  };
  for (int i = 0; i < 1000; ++i) {
    auto a = random_set();
    auto b = random_set();
    ASSERT_DOUBLE_EQ(answer_f1(a, b), answer_f1(b, a));
  }
}

TEST(Components, ExecStructFormat) {
  auto gold = AnswerSet::bindings({"x"}, {{"a"}, {"b"}});
  EXPECT_DOUBLE_EQ(r_exec(ExecutionOutcome::failure(ExecutionStatus::ParseOrSyntaxError, "e"), gold),
                   -0.5);
  EXPECT_DOUBLE_EQ(r_exec(ExecutionOutcome::success(gold), gold), 1.0);
  EXPECT_DOUBLE_EQ(r_exec(ExecutionOutcome::success(AnswerSet::bindings({"x"}, {{"a"}})), gold),
                   2.0 / 3.0);

  std::vector<EntityHint> ents = {{"e1", "E1"}, {"e2", "E2"}};
  std::vector<RelationHint> rels = {{"r1", "R1", "", "", ""}};
  EXPECT_DOUBLE_EQ(r_struct("<e1> <r1> <e2>", ents, rels), 1.0);
  EXPECT_DOUBLE_EQ(r_struct("<e1> <r1> ?x", ents, rels), 0.5);
  EXPECT_DOUBLE_EQ(r_struct("?x ?y ?z", {}, {}), 1.0);
  EXPECT_DOUBLE_EQ(r_struct("?x ?y ?z", ents, rels), 0.0);

  EXPECT_DOUBLE_EQ(r_format(make_completion("<think>a</think>ASK { }")), 1.0);
  EXPECT_DOUBLE_EQ(r_format(make_completion("<think>a</think>")), 0.0);
  EXPECT_DOUBLE_EQ(r_format(make_completion("ASK { }")), 1.0);
  EXPECT_DOUBLE_EQ(r_format(make_completion("  \n")), 0.0);
}

TEST(Components, Length) {
  EXPECT_DOUBLE_EQ(r_len(768, 768, 1024), 1.0);
  EXPECT_DOUBLE_EQ(r_len(896, 768, 1024), 0.5);
  EXPECT_DOUBLE_EQ(r_len(1024, 768, 1024), 0.0);
  EXPECT_DOUBLE_EQ(r_len(5000, 768, 1024), 0.0);
  EXPECT_DOUBLE_EQ(r_len(0, 768, 1024), 1.0);
  double prev = 1.0;
  for (std::size_t x = 0; x < 1100; ++x) {
    const double v = r_len(x, 768, 1024);
    ASSERT_LE(v, prev);
    prev = v;
  }
  EXPECT_THROW(r_len(1, 10, 10), std::invalid_argument);
}

TEST(Components, LengthRatio) {
  EXPECT_DOUBLE_EQ(r_len_ratio(7, 7, 2), 1.0);
  EXPECT_NEAR(r_len_ratio(20, 10, 2), 0.25, 1e-15);
  EXPECT_NEAR(r_len_ratio(5, 10, 2), 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(r_len_ratio(0, 10, 2), 0.0);
  for (std::size_t a = 1; a < 30; ++a) {
    for (std::size_t b = 1; b < 30; ++b) ASSERT_NEAR(r_len_ratio(a, b, 2), r_len_ratio(b, a, 2), 1e-15);
  }
}

// ---- configuration ----

TEST(Config, PresetsMatchShippedFiles) {
  ASSERT_EQ(reward_preset_names().size(), 5u);
  for (const auto& name : reward_preset_names()) {
    auto file = load_reward_config(std::string(SPARQLRL_SOURCE_DIR) + "/configs/presets/" +
                                   name + ".json");
    EXPECT_EQ(file, reward_preset(name)) << name;
    EXPECT_EQ(reward_config_from_json(reward_config_to_json(file)), file);
  }
  EXPECT_THROW(reward_preset("nope"), std::invalid_argument);
}

TEST(Config, Validation) {
  EXPECT_THROW(reward_config_from_json({{"len_target", 10}, {"len_max", 10}}),
               std::invalid_argument);
  EXPECT_THROW(reward_config_from_json({{"gold_available", false}}), std::invalid_argument);
  EXPECT_THROW(reward_config_from_json({{"weight", 1}}), std::invalid_argument);
  auto c = reward_config_from_json({{"gold_available", false}, {"enabled", {"exec", "len"}}});
  EXPECT_TRUE(c.is_enabled(RewardComponent::Len));
  EXPECT_FALSE(c.is_enabled(RewardComponent::Format));
  EXPECT_DOUBLE_EQ(reward_preset("full-with-gold").max_total(), 8.5);
  EXPECT_DOUBLE_EQ(reward_preset("full-with-gold").min_total(), -1.5);
  EXPECT_DOUBLE_EQ(reward_preset("exec+format+struct+len").max_total(), 5.5);
}

// ---- composition ----

struct Fixture {
  Fixture() {
    std::istringstream in("<p1> <by> <alice> .\n<p1> <by> <bob> .\n<p2> <by> <alice> .\n");
    backend = std::make_unique<EmbeddedBackend>(
        std::make_shared<const sparql::TripleStore>(sparql::parse_triples(in)));
    inst.id = "f";
    inst.question = "Who wrote p1?";
    inst.entities = {{"p1", "P1"}};
    inst.relations = {{"by", "authored by", "", "", ""}};
    inst.gold_query = "SELECT DISTINCT ?x WHERE { <p1> <by> ?x }";
    inst.gold_answers = AnswerSet::bindings({"x"}, {{"alice"}, {"bob"}});
  }
  ScoringContext context() { return ScoringContext{backend.get(), &cache, std::nullopt, {}}; }

  std::unique_ptr<EmbeddedBackend> backend;
  QueryCache cache;
  QAInstance inst;
};

TEST(Score, PerfectNoGold) {
  Fixture f;
  auto b = score_completion(make_completion("<think>r</think> SELECT DISTINCT ?x WHERE { <p1> <by> ?x }"),
                            f.inst, reward_preset("exec+format+struct+len"), f.context());
  EXPECT_DOUBLE_EQ(b.total, 5.5);
  EXPECT_FALSE(b.get(RewardComponent::Sim).has_value());
  EXPECT_FALSE(b.get(RewardComponent::LenRatio).has_value());
  EXPECT_EQ(b.execution_status, ExecutionStatus::Ok);
}

TEST(Score, BrokenQueryNoGold) {
  Fixture f;
  auto b = score_completion(make_completion("<think>r</think> SELECT DISTINCT ?x WHERE { <p1> <by> ?x"),
                            f.inst, reward_preset("exec+format+struct+len"), f.context());
  EXPECT_EQ(b.execution_status, ExecutionStatus::ParseOrSyntaxError);
  EXPECT_DOUBLE_EQ(*b.get(RewardComponent::Exec), -0.5);
  EXPECT_DOUBLE_EQ(b.total, 3 * -0.5 + 1.0 * 1.0 + 0.5 * 1.0 + 1.0 * 1.0);
}

TEST(Score, VerbatimGoldFullConfig) {
  Fixture f;
  auto b = score_completion(make_completion("<think>r</think>" + *f.inst.gold_query), f.inst,
                            reward_preset("full-with-gold"), f.context());
  EXPECT_DOUBLE_EQ(*b.get(RewardComponent::Sim), 1.0);
  EXPECT_DOUBLE_EQ(*b.get(RewardComponent::LenRatio), 1.0);
  EXPECT_DOUBLE_EQ(b.total, 8.5);
}

TEST(Score, ExecOnlyIsThreeTimesExec) {
  Fixture f;
  for (const char* q : {"SELECT DISTINCT ?x WHERE { ?x <by> <alice> }", "ASK { }", "garbage",
                        "SELECT DISTINCT ?x WHERE { <p1> <by> ?x }"}) {
    auto b = score_completion(make_completion(q), f.inst, reward_preset("exec"), f.context());
    EXPECT_DOUBLE_EQ(b.total, 3.0 * *b.get(RewardComponent::Exec)) << q;
  }
}

TEST(Score, RequiresGold) {
  Fixture f;
  QAInstance no_answers = f.inst;
  no_answers.gold_answers.reset();
  EXPECT_THROW(score_completion(make_completion("ASK { }"), no_answers, reward_preset("exec"),
                                f.context()),
               std::invalid_argument);
  QAInstance no_query = f.inst;
  no_query.gold_query.reset();
  EXPECT_NO_THROW(score_completion(make_completion("ASK { }"), no_query,
                                   reward_preset("exec+format+struct+len"), f.context()));
  EXPECT_THROW(score_completion(make_completion("ASK { }"), no_query,
                                reward_preset("full-with-gold"), f.context()),
               std::invalid_argument);
}

TEST(Score, TotalsStayInBounds) {
  Fixture f;
  std::mt19937_64 rng(12);
  const std::vector<std::string> pieces = {"SELECT", "DISTINCT", "?x", "WHERE", "{", "}",
                                           "<p1>",   "<by>",     "<alice>", ".", "ASK",
                                           "<think>", "</think>", "```"};
  for (const auto& name : reward_preset_names()) {
    const auto config = reward_preset(name);
    for (int i = 0; i < 200; ++i) {
      std::string text;
      const int n = std::uniform_int_distribution<int>(0, 14)(rng);
      for (int k = 0; k < n; ++k) text += pieces[rng() % pieces.size()] + " ";
      auto b = score_completion(make_completion(text), f.inst, config, f.context());
      ASSERT_GE(b.total, config.min_total()) << text;
      ASSERT_LE(b.total, config.max_total()) << text;
      double sum = 0;
      for (auto c : kAllRewardComponents) {
        ASSERT_EQ(b.get(c).has_value(), config.is_enabled(c));
        if (!b.get(c)) continue;
        sum += config.weight(c) * *b.get(c);
        if (c == RewardComponent::Exec) {
          ASSERT_TRUE(*b.get(c) == -0.5 || (*b.get(c) >= 0 && *b.get(c) <= 1));
        } else {
          ASSERT_GE(*b.get(c), 0.0);
          ASSERT_LE(*b.get(c), 1.0);
        }
      }
      ASSERT_DOUBLE_EQ(b.total, sum);
    }
  }
}

}  // namespace
}  // namespace sparqlrl
