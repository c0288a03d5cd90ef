// Copyright 2026 The mlmattack Authors
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

#include "mlmattack/attack.h"

#include <algorithm>
#include <set>

#include "gtest/gtest.h"
#include "mlmattack/candidates.h"
#include "mlmattack/errors.h"
#include "mlmattack/run_config.h"
#include "support/fuzz.h"
#include "support/toy_models.h"
#include "support/toy_world.h"

namespace mlmattack {
namespace {

using testing::MakeKeywordWorld;
using testing::PlainConfig;

std::shared_ptr<const FilterConfig> ShippedLexicon() {
  auto lexicon = std::make_shared<FilterConfig>();
  lexicon->stopwords = LoadStopwords(ShippedDataDir() / "stopwords.txt");
  return lexicon;
}

TEST(AttackTest, TableTenPremise) {
  const auto world = testing::MakeNliWorld();
  const auto gateway = world.Gateway();
  AttackConfig cfg = PlainConfig();
  cfg.lexicon = ShippedLexicon();
  const AttackOutcome out = Attack(world.sample, cfg, *gateway);
  ASSERT_EQ(out.status, AttackStatus::kSuccess);
  EXPECT_EQ(Detokenize(out.adversarial.words), "many rooms have balconies .");
  EXPECT_EQ(out.adversarial_input.text, "many rooms have balconies .");
  EXPECT_EQ(*out.adversarial_input.hypothesis, "all of the rooms have balconies off of them .");
  EXPECT_EQ(out.original_prediction, 2);
  EXPECT_EQ(world.labels.Name(out.final_prediction), "neutral");
  EXPECT_EQ(out.perturbed_indices, (std::vector<std::size_t>{0}));
  EXPECT_EQ(PerturbPercentage(out), 20.0);
  // 5 words + 1 original, then "many" is the first candidate tried.
  EXPECT_EQ(out.target_queries, 7);
  EXPECT_EQ(out.mlm_queries, 1);
}

TEST(AttackTest, MisclassifiedIsSkipped) {
  const auto world = MakeKeywordWorld();
  const auto gateway = world.Gateway();
  const TextSample sample = TextSample::Single("s", "the movie was terrible", testing::kPositive);
  const AttackOutcome out = Attack(sample, PlainConfig(), *gateway);
  EXPECT_EQ(out.status, AttackStatus::kSkipped);
  EXPECT_EQ(out.target_queries, 1);
  EXPECT_EQ(out.mlm_queries, 0);
  EXPECT_TRUE(out.perturbed_indices.empty());
  EXPECT_EQ(out.adversarial.words, out.original.words);
  EXPECT_EQ(PerturbPercentage(out), 0.0);
  EXPECT_FALSE(out.similarity.has_value());
}

TEST(AttackTest, KeywordToyDecisionTable) {
  const auto world = MakeKeywordWorld();
  const auto gateway = world.Gateway();
  // "movie was terrible" style samples: the keyword is replaced by the first
  // admissible candidate "fine", which removes the only negative weight.
  const TextSample sample = TextSample::Single("s", "the movie was terrible here", testing::kNegative);
  const AttackOutcome out = Attack(sample, PlainConfig(), *gateway);
  ASSERT_EQ(out.status, AttackStatus::kSuccess);
  EXPECT_EQ(out.perturbed_indices, (std::vector<std::size_t>{3}));
  EXPECT_EQ(out.adversarial.words[3], "fine");
  EXPECT_EQ(out.candidates_tried, 1);
  EXPECT_EQ(out.target_queries, (5 + 1) + 1 + 0);
  EXPECT_EQ(out.selected.front(), 3u);
}

TEST(AttackTest, PerturbPercentageRatio) {
  AttackOutcome out;
  out.status = AttackStatus::kSuccess;
  out.original.words = {"a", "b", "c", "d", "e"};
  out.perturbed_indices = {2};
  EXPECT_EQ(PerturbPercentage(out), 20.0);
}

TEST(AttackTest, VerificationIsLedgered) {
  const auto world = MakeKeywordWorld();
  const auto gateway = world.Gateway();
  AttackConfig cfg = PlainConfig();
  cfg.verify_success = true;
  const AttackOutcome out = Attack(world.corpus[0], cfg, *gateway);
  ASSERT_EQ(out.status, AttackStatus::kSuccess);
  EXPECT_EQ(out.verification_queries, 1);
  EXPECT_EQ(out.target_queries,
            static_cast<std::int64_t>(out.original.size()) + 1 + out.candidates_tried + 1);
}

TEST(AttackTest, KZeroRunsNoMlm) {
  const auto world = MakeKeywordWorld();
  const auto gateway = world.Gateway();
  AttackConfig cfg = PlainConfig();
  cfg.k = 0;
  const AttackOutcome out = Attack(world.corpus[0], cfg, *gateway);
  EXPECT_EQ(out.status, AttackStatus::kFailure);
  EXPECT_EQ(out.mlm_queries, 0);
  EXPECT_EQ(out.target_queries, static_cast<std::int64_t>(out.original.size()) + 1);
}

TEST(AttackTest, BudgetBelowRankingCost) {
  const auto world = MakeKeywordWorld();
  const auto gateway = world.Gateway();
  AttackConfig cfg = PlainConfig();
  cfg.max_target_queries = 3;
  const AttackOutcome out = Attack(world.corpus[0], cfg, *gateway);
  EXPECT_EQ(out.status, AttackStatus::kFailure);
  EXPECT_TRUE(out.budget_exceeded);
  EXPECT_EQ(out.target_queries, 1);
}

TEST(AttackTest, BudgetStopsCandidateLoop) {
  const auto world = MakeKeywordWorld();
  const auto gateway = world.Gateway();
  AttackConfig cfg = PlainConfig();
  const std::int64_t n = static_cast<std::int64_t>(SplitWords(world.corpus[0].text, true).size());
  cfg.max_target_queries = n + 1;
  const AttackOutcome out = Attack(world.corpus[0], cfg, *gateway);
  EXPECT_EQ(out.status, AttackStatus::kFailure);
  EXPECT_TRUE(out.budget_exceeded);
  EXPECT_EQ(out.target_queries, n + 1);
  EXPECT_EQ(out.candidates_tried, 0);
}

TEST(AttackTest, SubwordToggleSkipsMultiPieceWords) {
  const auto world = MakeKeywordWorld(/*split_keyword=*/true);
  const auto gateway = world.Gateway();
  AttackConfig cfg = PlainConfig();
  const TextSample sample = TextSample::Single("s", "movie terrible", testing::kNegative);
  const AttackOutcome on = Attack(sample, cfg, *gateway);
  ASSERT_EQ(on.status, AttackStatus::kSuccess);
  EXPECT_EQ(on.adversarial.words[1], "fine");
  cfg.use_subword_attack = false;
  const AttackOutcome off = Attack(sample, cfg, *gateway);
  EXPECT_EQ(off.status, AttackStatus::kFailure);
  EXPECT_EQ(off.candidates_tried, 0);
}

TEST(AttackTest, RescoreModeCountsExtraMlmPasses) {
  const auto world = MakeKeywordWorld(/*split_keyword=*/true);
  const auto gateway = world.Gateway();
  AttackConfig cfg = PlainConfig();
  cfg.rescore_subwords = true;
  const TextSample sample = TextSample::Single("s", "movie terrible", testing::kNegative);
  const AttackOutcome out = Attack(sample, cfg, *gateway);
  ASSERT_EQ(out.status, AttackStatus::kSuccess);
  // fin ##e, terr ##e and fin ##ible survive filtering: one pass each.
  EXPECT_EQ(out.mlm_queries, 1 + 3);
}

TEST(AttackTest, InLoopGateRejectsDissimilarFlips) {
  const auto world = MakeKeywordWorld();
  // Every text embeds to the same vector except flips to "fine".
  class Picky : public EncoderBackend {
   public:
    std::vector<double> Embed(const std::string& text) override {
      return text.find("fine") == std::string::npos ? std::vector<double>{1.0, 0.0}
                                                    : std::vector<double>{0.0, 1.0};
    }
  };
  const auto gateway = world.Gateway(std::make_shared<Picky>());
  AttackConfig cfg = PlainConfig();
  cfg.sim_gate = SimGate::kInLoop;
  const TextSample sample = TextSample::Single("s", "movie terrible", testing::kNegative);
  const AttackOutcome out = Attack(sample, cfg, *gateway);
  ASSERT_EQ(out.status, AttackStatus::kSuccess);
  EXPECT_EQ(out.adversarial.words[1], "awful");
  EXPECT_EQ(out.candidates_tried, 2);
  EXPECT_TRUE(out.sim_gate_passed);
  EXPECT_EQ(*out.similarity, 1.0);
}

TEST(AttackTest, PostHocGateFlagsOutcome) {
  const auto world = MakeKeywordWorld();
  class Orthogonal : public EncoderBackend {
   public:
    std::vector<double> Embed(const std::string& text) override {
      return text.find("fine") == std::string::npos ? std::vector<double>{1.0, 0.0}
                                                    : std::vector<double>{0.0, 1.0};
    }
  };
  const auto gateway = world.Gateway(std::make_shared<Orthogonal>());
  AttackConfig cfg;
  const TextSample sample = TextSample::Single("s", "movie terrible", testing::kNegative);
  const AttackOutcome out = Attack(sample, cfg, *gateway);
  EXPECT_EQ(out.status, AttackStatus::kSuccess);
  EXPECT_EQ(*out.similarity, 0.0);
  EXPECT_FALSE(out.sim_gate_passed);
  cfg.sim_gate = SimGate::kOff;
  EXPECT_TRUE(Attack(sample, cfg, *gateway).sim_gate_passed);
}

TEST(AttackTest, CommitsOnlyStrictImprovements) {
  // "dull" is replaced by "okay" (lower negative output) without flipping;
  // the keyword then flips.
  const auto world = MakeKeywordWorld();
  const auto gateway = world.Gateway();
  AttackConfig cfg = PlainConfig();
  cfg.ranking_mode = RankingMode::kLir;
  const TextSample sample = TextSample::Single("s", "dull terrible dull movie", testing::kNegative);
  const AttackOutcome out = Attack(sample, cfg, *gateway);
  ASSERT_EQ(out.status, AttackStatus::kSuccess);
  EXPECT_EQ(out.adversarial.words, (std::vector<std::string>{"okay", "fine", "okay", "movie"}));
  ASSERT_EQ(out.gold_score_trace.size(), 3u);
  EXPECT_NEAR(out.gold_score_trace[0], 2.8, 1e-12);
  EXPECT_NEAR(out.gold_score_trace[1], 2.4, 1e-12);
  EXPECT_NEAR(out.gold_score_trace[2], 2.0, 1e-12);
}

TEST(AttackTest, Deterministic) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = testing::MakeFuzzCase(seed);
    const auto gateway = c.Gateway();
    const AttackOutcome a = Attack(c.sample, c.cfg, *gateway);
    const AttackOutcome b = Attack(c.sample, c.cfg, *gateway);
    ASSERT_EQ(a.adversarial.words, b.adversarial.words);
    ASSERT_EQ(a.perturbed_indices, b.perturbed_indices);
    ASSERT_EQ(a.target_queries, b.target_queries);
    ASSERT_EQ(a.gold_score_trace, b.gold_score_trace);
  }
}

TEST(AttackTest, ConfigValidation) {
  const auto world = MakeKeywordWorld();
  const auto gateway = world.Gateway();
  const auto expect_field = [&](AttackConfig cfg, const std::string& field) {
    try {
      Attack(world.corpus[0], cfg, *gateway);
      FAIL() << field;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.field(), field);
    }
  };
  AttackConfig cfg;
  cfg.k = -1;
  expect_field(cfg, "attack.k");
  cfg = {};
  cfg.epsilon = 0.0;
  expect_field(cfg, "attack.epsilon");
  cfg = {};
  cfg.sim_threshold = 1.5;
  expect_field(cfg, "attack.sim_threshold");
  cfg = {};
  cfg.prob_threshold = 0.5;
  expect_field(cfg, "attack.prob_threshold");
  cfg = {};
  cfg.subword.max_span = 0;
  expect_field(cfg, "attack.subword.max_span");
  cfg = {};
  cfg.subword.max_enumeration = 10;
  expect_field(cfg, "attack.subword.max_enumeration");
  cfg = {};
  cfg.max_target_queries = 0;
  expect_field(cfg, "attack.max_target_queries");
  TextSample bad = world.corpus[0];
  bad.gold = 7;
  EXPECT_THROW(Attack(bad, AttackConfig{}, *gateway), ConfigError);
}

TEST(AttackTest, DefaultThresholds) {
  AttackConfig cfg;
  EXPECT_EQ(cfg.k, 48);
  EXPECT_EQ(cfg.epsilon, 1.0);
  EXPECT_EQ(cfg.EffectiveSimThreshold(false), 0.4);
  EXPECT_EQ(cfg.EffectiveSimThreshold(true), 0.2);
  cfg.sim_threshold = 0.7;
  EXPECT_EQ(cfg.EffectiveSimThreshold(true), 0.7);
  EXPECT_EQ(cfg.sim_gate, SimGate::kPostHoc);
}

TEST(AttackTest, SampleSeedsDependOnIdAndRunSeed) {
  EXPECT_EQ(DeriveSampleSeed(1, "a"), DeriveSampleSeed(1, "a"));
  EXPECT_NE(DeriveSampleSeed(1, "a"), DeriveSampleSeed(1, "b"));
  EXPECT_NE(DeriveSampleSeed(1, "a"), DeriveSampleSeed(2, "a"));
}

TEST(AttackTest, NameRoundTrips) {
  for (auto s : {AttackStatus::kSuccess, AttackStatus::kFailure, AttackStatus::kSkipped}) {
    EXPECT_EQ(ParseAttackStatus(AttackStatusName(s)), s);
  }
  for (auto g : {SimGate::kPostHoc, SimGate::kInLoop, SimGate::kOff}) {
    EXPECT_EQ(ParseSimGate(SimGateName(g)), g);
  }
}

TEST(AttackTest, LongInputsAttackOnlyTheMlmWindow) {
  auto world = MakeKeywordWorld();
  world.mlm = std::make_shared<testing::TableMlm>(world.vocab->size(),
                                                  std::map<TokenId, std::vector<MlmEntry>>{}, 4);
  const auto gateway = world.Gateway();
  const TextSample sample =
      TextSample::Single("s", "movie plot film scene terrible", testing::kNegative);
  const AttackOutcome out = Attack(sample, PlainConfig(), *gateway);
  EXPECT_EQ(out.status, AttackStatus::kFailure);
  EXPECT_EQ(out.mlm_queries, 1);
  EXPECT_EQ(out.candidates_tried, 0);
}

// Property checks over random stub worlds.
class AttackFuzzTest : public ::testing::TestWithParam<int> {};

TEST_P(AttackFuzzTest, Invariants) {
  for (int i = 0; i < 50; ++i) {
    const std::uint64_t seed = static_cast<std::uint64_t>(GetParam()) * 1000 + i;
    const auto c = testing::MakeFuzzCase(seed);
    const auto gateway = c.Gateway();
    const long before = c.counting->calls();
    const AttackOutcome out = Attack(c.sample, c.cfg, *gateway);
    const std::int64_t n = static_cast<std::int64_t>(out.original.size());
    SCOPED_TRACE(c.sample.text);
    ASSERT_EQ(out.target_queries, c.counting->calls() - before);
    if (out.status == AttackStatus::kSkipped) {
      ASSERT_EQ(out.target_queries, 1);
      ASSERT_TRUE(out.perturbed_indices.empty());
      continue;
    }
    if (out.budget_exceeded && out.selected.empty() && n > 0) {
      ASSERT_EQ(out.target_queries, 1);
    } else if (n > 0) {
      ASSERT_EQ(out.target_queries, n + 1 + out.candidates_tried + out.verification_queries);
    }
    ASSERT_LE(out.mlm_queries, 1);
    if (c.cfg.max_target_queries && n + 1 <= *c.cfg.max_target_queries) {
      ASSERT_LE(out.target_queries, *c.cfg.max_target_queries + out.verification_queries);
    }
    for (std::size_t j : out.perturbed_indices) {
      ASSERT_NE(std::find(out.selected.begin(), out.selected.end(), j), out.selected.end());
    }
    ASSERT_TRUE(std::is_sorted(out.perturbed_indices.begin(), out.perturbed_indices.end()));
    ASSERT_EQ(std::set<std::size_t>(out.perturbed_indices.begin(), out.perturbed_indices.end()).size(),
              out.perturbed_indices.size());
    for (std::size_t t = 1; t < out.gold_score_trace.size(); ++t) {
      ASSERT_LT(out.gold_score_trace[t], out.gold_score_trace[t - 1]);
    }
    if (out.status == AttackStatus::kSuccess) {
      GatewaySession fresh = gateway->OpenSession();
      ASSERT_NE(fresh.Classify(out.adversarial_input).Argmax(), c.sample.gold);
    }
    // Only words that differ from the original count as perturbed.
    for (std::size_t j = 0; j < out.original.size(); ++j) {
      const bool changed = out.original.words[j] != out.adversarial.words[j];
      const bool listed = std::binary_search(out.perturbed_indices.begin(),
                                             out.perturbed_indices.end(), j);
      ASSERT_EQ(changed, listed);
    }
    if (!c.cfg.use_subword_attack) {
      const SubwordAlignment a = AlignSubwords(out.original, *c.vocab);
      for (std::size_t j : out.perturbed_indices) ASSERT_EQ(a.spans[j].length(), 1u);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, AttackFuzzTest, ::testing::Range(0, 8));

}  // namespace
}  // namespace mlmattack
