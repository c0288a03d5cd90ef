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


#include "mlmattack/torchscript_backend.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "mlmattack/bundle.h"
#include "mlmattack/errors.h"

namespace mlmattack {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kTolerance = 1e-4;

const fs::path kTiny = MLMATTACK_TINY_DIR;

json ProbeReference() {
  std::ifstream in(kTiny / "probe_reference.json");
  return json::parse(in);
}

class TinyBundleTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { bundle_ = new ModelBundle(LoadBundle(kTiny / "bundle")); }
  static void TearDownTestSuite() { delete bundle_; }

  static ModelBundle* bundle_;
};
ModelBundle* TinyBundleTest::bundle_ = nullptr;

TEST_F(TinyBundleTest, Manifest) {
  EXPECT_EQ(bundle_->info.max_positions, 64u);
  EXPECT_FALSE(bundle_->info.cased);
  ASSERT_TRUE(bundle_->labels.has_value());
  EXPECT_EQ(bundle_->labels->names(), (std::vector<std::string>{"negative", "positive"}));
  const auto sums = BundleChecksums(kTiny / "bundle");
  EXPECT_EQ(sums.size(), 6u);
  EXPECT_EQ(sums.at("vocab.txt").size(), 64u);
}

TEST_F(TinyBundleTest, TokenizationMatchesReference) {
  for (const json& probe : ProbeReference()) {
    const std::string text = probe["text"];
    const auto tokens = AlignSubwords(SplitWords(text, true), *bundle_->vocab).tokens;
    EXPECT_EQ(tokens, probe["token_ids"].get<std::vector<TokenId>>()) << text;
  }
}

TEST_F(TinyBundleTest, ClassifierParity) {
  auto classifier = LoadTorchScriptClassifier(*bundle_);
  for (const json& probe : ProbeReference()) {
    const std::vector<double> got = classifier->Classify({probe["text"], std::nullopt});
    const auto want = probe["logits"].get<std::vector<double>>();
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], kTolerance);
  }
}

TEST_F(TinyBundleTest, MlmParity) {
  auto mlm = LoadTorchScriptMlm(*bundle_);
  EXPECT_EQ(mlm->vocab_size(), bundle_->vocab->size());
  EXPECT_EQ(mlm->max_tokens(), 62u);
  for (const json& probe : ProbeReference()) {
    const auto ids = probe["token_ids"].get<std::vector<TokenId>>();
    const MlmTopK topk = mlm->TopK(ids, 5);
    const json& want = probe["mlm_top5"];
    ASSERT_EQ(topk.rows.size(), want.size());
    for (std::size_t p = 0; p < want.size(); ++p) {
      ASSERT_EQ(topk.rows[p].size(), 5u);
      for (std::size_t c = 0; c < 5; ++c) {
        EXPECT_EQ(topk.rows[p][c].token_id, want[p][c][0].get<TokenId>());
        EXPECT_NEAR(topk.rows[p][c].log_prob, want[p][c][1].get<double>(), kTolerance);
      }
    }
  }
}

TEST_F(TinyBundleTest, EncoderParity) {
  auto encoder = LoadTorchScriptEncoder(*bundle_);
  for (const json& probe : ProbeReference()) {
    const std::vector<double> got = encoder->Embed(probe["text"]);
    const auto want = probe["embedding"].get<std::vector<double>>();
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], kTolerance);
  }
}

TEST_F(TinyBundleTest, RepeatedCallsAgree) {
  auto classifier = LoadTorchScriptClassifier(*bundle_);
  const ClassifierInput in{"the movie was really good .", std::nullopt};
  const std::vector<double> first = classifier->Classify(in);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(classifier->Classify(in), first);
}

TEST_F(TinyBundleTest, MlmTooLong) {
  auto mlm = LoadTorchScriptMlm(*bundle_);
  const std::vector<TokenId> ids(63, *bundle_->vocab->Find("good"));
  EXPECT_THROW(mlm->TopK(ids, 1), SequenceTooLong);
}

TEST_F(TinyBundleTest, ClassifierTruncatesLongInput) {
  auto classifier = LoadTorchScriptClassifier(*bundle_);
  std::string text;
  for (int i = 0; i < 100; ++i) text += "good ";
  EXPECT_EQ(classifier->Classify({text, std::nullopt}).size(), 2u);
}

class BundleErrorTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mlmattack_bundle_" + std::string(::testing::UnitTest::GetInstance()
                                                   ->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    for (const char* f : {"bundle.json", "vocab.txt", "label_map.json"}) {
      fs::copy_file(kTiny / "bundle" / f, dir_ / f);
    }
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST_F(BundleErrorTest, MissingDirectory) {
  EXPECT_THROW(LoadBundle(dir_ / "nope"), ConfigError);
}

TEST_F(BundleErrorTest, MissingManifest) {
  fs::remove(dir_ / "bundle.json");
  EXPECT_THROW(LoadBundle(dir_), ConfigError);
}

TEST_F(BundleErrorTest, MissingGraph) {
  const ModelBundle bundle = LoadBundle(dir_);
  EXPECT_THROW(LoadTorchScriptClassifier(bundle), BackendUnavailable);
}

TEST_F(BundleErrorTest, CorruptGraph) {
  std::ofstream(dir_ / "mlm.pt") << "not a torchscript archive";
  const ModelBundle bundle = LoadBundle(dir_);
  EXPECT_THROW(LoadTorchScriptMlm(bundle), BackendUnavailable);
}

TEST_F(BundleErrorTest, VocabularySizeMismatch) {
  std::ofstream(dir_ / "vocab.txt", std::ios::app) << "extra\n";
  fs::copy_file(kTiny / "bundle" / "mlm.pt", dir_ / "mlm.pt");
  const ModelBundle bundle = LoadBundle(dir_);
  auto mlm = LoadTorchScriptMlm(bundle);
  const std::vector<TokenId> ids = {*bundle.vocab->Find("good")};
  EXPECT_THROW(mlm->TopK(ids, 1), ShapeMismatch);
}

TEST_F(BundleErrorTest, FileOverrides) {
  fs::copy_file(kTiny / "bundle" / "classifier.pt", dir_ / "target.pt");
  std::ofstream(dir_ / "bundle.json")
      << R"({"max_positions": 64, "cased": false, "classifier_file": "target.pt"})";
  const ModelBundle bundle = LoadBundle(dir_);
  EXPECT_EQ(bundle.classifier_path().filename(), "target.pt");
  EXPECT_EQ(LoadTorchScriptClassifier(bundle)->Classify({"good", std::nullopt}).size(), 2u);
}

TEST(BundleInfoTest, ParseErrors) {
  EXPECT_THROW(ParseBundleInfo("{"), ConfigError);
  EXPECT_THROW(ParseBundleInfo(R"({"cased": false})"), ConfigError);
  EXPECT_THROW(ParseBundleInfo(R"({"max_positions": 2, "cased": false})"), ConfigError);
  EXPECT_THROW(ParseBundleInfo(R"({"max_positions": 8, "cased": false, "logit_kind": "x"})"),
               ConfigError);
  const BundleInfo info = ParseBundleInfo(R"({"max_positions": 8, "cased": true,
                                              "logit_kind": "softmax"})");
  EXPECT_EQ(info.max_positions, 8u);
  EXPECT_TRUE(info.cased);
  EXPECT_EQ(info.logit_kind, LogitKind::kSoftmax);
  EXPECT_EQ(info.mlm_file, "mlm.pt");
}

}  // namespace
}  // namespace mlmattack
