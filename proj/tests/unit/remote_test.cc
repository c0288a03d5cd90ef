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


#include "mlmattack/remote.h"

#include <memory>
#include <stdexcept>
#include <thread>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "httplib.h"
#include "json.hpp"
#include "mlmattack/attack.h"
#include "mlmattack/errors.h"
#include "mlmattack/records.h"
#include "support/toy_models.h"
#include "support/toy_world.h"

namespace mlmattack {
namespace {

using nlohmann::json;
using testing::BagOfWordsEncoder;
using testing::KeywordWorld;
using testing::MakeKeywordWorld;
using testing::MakeNliWorld;

class ThrowingClassifier : public ClassifierBackend {
 public:
  std::vector<double> Classify(const ClassifierInput&) override {
    throw std::runtime_error("backend exploded");
  }
};

std::string Url(int port) { return "http://127.0.0.1:" + std::to_string(port); }

httplib::Result RawPost(int port, const std::string& route, const std::string& body) {
  httplib::Client client(Url(port));
  return client.Post(route, body, "application/json");
}

class RemoteWorldTest : public ::testing::Test {
 protected:
  void SetUp() override {
    world_ = MakeKeywordWorld();
    encoder_ = std::make_shared<BagOfWordsEncoder>();
    server_ = std::make_unique<ModelServer>(world_.classifier, world_.mlm, encoder_);
    port_ = server_->Start();
  }

  std::unique_ptr<ModelGateway> RemoteGateway() const {
    return std::make_unique<ModelGateway>(GatewayOptions{
        MakeRemoteClassifier(Url(port_)),
        MakeRemoteMlm(Url(port_), world_.mlm->vocab_size(), world_.mlm->max_tokens()),
        MakeRemoteEncoder(Url(port_)), world_.vocab, world_.labels, LogitKind::kRaw});
  }

  KeywordWorld world_;
  std::shared_ptr<EncoderBackend> encoder_;
  std::unique_ptr<ModelServer> server_;
  int port_ = 0;
};

TEST_F(RemoteWorldTest, ClassifyMatchesLocal) {
  auto remote = MakeRemoteClassifier(Url(port_));
  for (const TextSample& s : world_.corpus) {
    const ClassifierInput in = s.AsClassifierInput();
    EXPECT_EQ(remote->Classify(in), world_.classifier->Classify(in)) << s.id;
  }
}

TEST_F(RemoteWorldTest, MlmMatchesLocal) {
  auto remote = MakeRemoteMlm(Url(port_), world_.mlm->vocab_size(), world_.mlm->max_tokens());
  const std::vector<TokenId> tokens = TokenizeWord("terrible", *world_.vocab);
  std::vector<TokenId> seq = {tokens[0], *world_.vocab->Find("dull"), *world_.vocab->Find("movie")};
  const MlmTopK a = remote->TopK(seq, 2);
  const MlmTopK b = world_.mlm->TopK(seq, 2);
  ASSERT_EQ(a.rows.size(), seq.size());
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(remote->vocab_size(), world_.vocab->size());
}

TEST_F(RemoteWorldTest, EmbedMatchesLocal) {
  auto remote = MakeRemoteEncoder(Url(port_));
  EXPECT_EQ(remote->Embed("movie was dull"), encoder_->Embed("movie was dull"));
}

TEST_F(RemoteWorldTest, AttackThroughServerMatchesInProcess) {
  const auto local = world_.Gateway(encoder_);
  const auto remote = RemoteGateway();
  AttackConfig cfg = testing::PlainConfig();
  for (std::size_t i = 0; i < 6; ++i) {
    const TextSample& s = world_.corpus[i];
    const AttackOutcome a = Attack(s, cfg, *local);
    const AttackOutcome b = Attack(s, cfg, *remote);
    EXPECT_EQ(OutcomeToJson(s, a, world_.labels), OutcomeToJson(s, b, world_.labels)) << s.id;
  }
}

TEST_F(RemoteWorldTest, BadJsonIs400) {
  auto res = RawPost(port_, "/classify", "{not json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = RawPost(port_, "/mlm_topk", R"({"token_ids": [5]})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST(RemoteServerTest, MissingRoleIs404) {
  const auto nli = MakeNliWorld();
  ModelServer server(nli.classifier, nullptr, nullptr);
  const int port = server.Start();
  auto res = RawPost(port, "/embed", R"({"text": "a"})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = RawPost(port, "/mlm_topk", R"({"token_ids": [5], "k": 1})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_THROW(MakeRemoteEncoder(Url(port))->Embed("a"), BackendUnavailable);
}

TEST(RemoteServerTest, PairInputRoundTrips) {
  const auto nli = MakeNliWorld();
  ModelServer server(nli.classifier, nullptr, nullptr);
  const int port = server.Start();
  const ClassifierInput in = nli.sample.AsClassifierInput();
  EXPECT_EQ(MakeRemoteClassifier(Url(port))->Classify(in), nli.classifier->Classify(in));
  const auto res = RawPost(port, "/classify",
                           json{{"premise", "some x"}, {"hypothesis", "all y"}}.dump());
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["logits"], json::parse("[0.0, 0.0, 1.0]"));
}

TEST(RemoteServerTest, BackendErrorIs500) {
  ModelServer server(std::make_shared<ThrowingClassifier>(), nullptr, nullptr);
  const int port = server.Start();
  auto res = RawPost(port, "/classify", R"({"text": "a"})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 500);
  EXPECT_NE(res->body.find("backend exploded"), std::string::npos);
  EXPECT_THROW(MakeRemoteClassifier(Url(port))->Classify({"a", std::nullopt}),
               BackendUnavailable);
}

TEST(RemoteServerTest, DeadPortIsUnavailable) {
  int port = 0;
  {
    ModelServer server(std::make_shared<ThrowingClassifier>(), nullptr, nullptr);
    port = server.Start();
    server.Stop();
  }
  RemoteOptions options;
  options.timeout_s = 2.0;
  EXPECT_THROW(MakeRemoteClassifier(Url(port), options)->Classify({"a", std::nullopt}),
               BackendUnavailable);
}

TEST(RemoteServerTest, MalformedResponseIsUnavailable) {
  httplib::Server fake;
  fake.Post("/classify", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"logits": "nope"})", "application/json");
  });
  fake.Post("/mlm_topk", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"token_ids": [[1, 2]], "logprobs": [[-0.1]]})", "application/json");
  });
  const int port = fake.bind_to_any_port("127.0.0.1");
  std::thread t([&] { fake.listen_after_bind(); });
  fake.wait_until_ready();
  EXPECT_THROW(MakeRemoteClassifier(Url(port))->Classify({"a", std::nullopt}),
               BackendUnavailable);
  const std::vector<TokenId> ids = {5};
  EXPECT_THROW(MakeRemoteMlm(Url(port), 10, 10)->TopK(ids, 2), std::exception);
  fake.stop();
  t.join();
}

TEST(RemoteUrlTest, Detection) {
  EXPECT_TRUE(IsRemoteUrl("http://localhost:8000"));
  EXPECT_TRUE(IsRemoteUrl("https://example.org/x"));
  EXPECT_FALSE(IsRemoteUrl("/models/bundle"));
  EXPECT_FALSE(IsRemoteUrl("httpdir"));
}

}  // namespace
}  // namespace mlmattack
