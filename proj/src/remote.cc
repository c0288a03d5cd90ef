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

#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "mlmattack/errors.h"

namespace mlmattack {
namespace {

using nlohmann::json;

json Post(const std::string& base_url, const std::string& route, const json& body,
          const RemoteOptions& options) {
  httplib::Client client(base_url);
  const auto seconds = static_cast<time_t>(options.timeout_s);
  client.set_connection_timeout(seconds, 0);
  client.set_read_timeout(seconds, 0);
  client.set_write_timeout(seconds, 0);
  auto res = client.Post(route, body.dump(), "application/json");
  if (!res) {
    throw BackendUnavailable(base_url + route + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendUnavailable(base_url + route + ": HTTP " + std::to_string(res->status) +
                             " " + res->body);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw BackendUnavailable(base_url + route + ": malformed response: " + e.what());
  }
}

std::vector<double> DoubleArray(const json& doc, const char* key, const std::string& where) {
  try {
    return doc.at(key).get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw BackendUnavailable(where + ": bad '" + key + "' field: " + e.what());
  }
}

class RemoteClassifier : public ClassifierBackend {
 public:
  RemoteClassifier(std::string url, RemoteOptions options)
      : url_(std::move(url)), options_(options) {}

  std::vector<double> Classify(const ClassifierInput& input) override {
    json body = input.is_pair() ? json{{"premise", input.text}, {"hypothesis", *input.hypothesis}}
                                : json{{"text", input.text}};
    return DoubleArray(Post(url_, "/classify", body, options_), "logits", url_);
  }

 private:
  std::string url_;
  RemoteOptions options_;
};

class RemoteMlm : public MlmBackend {
 public:
  RemoteMlm(std::string url, std::size_t vocab_size, std::size_t max_tokens,
            RemoteOptions options)
      : url_(std::move(url)), vocab_size_(vocab_size), max_tokens_(max_tokens),
        options_(options) {}

  MlmTopK TopK(std::span<const TokenId> tokens, int k) override {
    json body{{"token_ids", std::vector<TokenId>(tokens.begin(), tokens.end())}, {"k", k}};
    const json doc = Post(url_, "/mlm_topk", body, options_);
    MlmTopK topk;
    topk.k = k;
    try {
      const auto ids = doc.at("token_ids").get<std::vector<std::vector<TokenId>>>();
      const auto lps = doc.at("logprobs").get<std::vector<std::vector<double>>>();
      if (ids.size() != lps.size()) throw ShapeMismatch("token_ids/logprobs row count differs");
      for (std::size_t r = 0; r < ids.size(); ++r) {
        if (ids[r].size() != lps[r].size()) throw ShapeMismatch("token_ids/logprobs row length differs");
        std::vector<MlmEntry> row;
        for (std::size_t c = 0; c < ids[r].size(); ++c) row.push_back({ids[r][c], lps[r][c]});
        topk.rows.push_back(std::move(row));
      }
    } catch (const json::exception& e) {
      throw BackendUnavailable(url_ + "/mlm_topk: malformed response: " + e.what());
    }
    return topk;
  }

  std::size_t vocab_size() const override { return vocab_size_; }
  std::size_t max_tokens() const override { return max_tokens_; }

 private:
  std::string url_;
  std::size_t vocab_size_;
  std::size_t max_tokens_;
  RemoteOptions options_;
};

class RemoteEncoder : public EncoderBackend {
 public:
  RemoteEncoder(std::string url, RemoteOptions options) : url_(std::move(url)), options_(options) {}

  std::vector<double> Embed(const std::string& text) override {
    return DoubleArray(Post(url_, "/embed", json{{"text", text}}, options_), "vector", url_);
  }

 private:
  std::string url_;
  RemoteOptions options_;
};

template <typename Handler>
void JsonRoute(httplib::Server& server, const std::string& path, std::mutex* mu,
               bool available, Handler handler) {
  server.Post(path, [=](const httplib::Request& req, httplib::Response& res) {
    if (!available) {
      res.status = 404;
      res.set_content(R"({"error":"model role not served"})", "application/json");
      return;
    }
    try {
      const json body = json::parse(req.body);
      std::unique_lock<std::mutex> lock;
      if (mu) lock = std::unique_lock<std::mutex>(*mu);
      res.set_content(handler(body).dump(), "application/json");
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

}  // namespace

bool IsRemoteUrl(const std::string& location) {
  return location.starts_with("http://") || location.starts_with("https://");
}

std::shared_ptr<ClassifierBackend> MakeRemoteClassifier(const std::string& base_url,
                                                        RemoteOptions options) {
  return std::make_shared<RemoteClassifier>(base_url, options);
}

std::shared_ptr<MlmBackend> MakeRemoteMlm(const std::string& base_url, std::size_t vocab_size,
                                          std::size_t max_tokens, RemoteOptions options) {
  return std::make_shared<RemoteMlm>(base_url, vocab_size, max_tokens, options);
}

std::shared_ptr<EncoderBackend> MakeRemoteEncoder(const std::string& base_url,
                                                  RemoteOptions options) {
  return std::make_shared<RemoteEncoder>(base_url, options);
}

struct ModelServer::Impl {
  httplib::Server server;
  std::shared_ptr<ClassifierBackend> classifier;
  std::shared_ptr<MlmBackend> mlm;
  std::shared_ptr<EncoderBackend> encoder;
  std::mutex classifier_mu, mlm_mu, encoder_mu;
  std::thread thread;
};

ModelServer::ModelServer(std::shared_ptr<ClassifierBackend> classifier,
                         std::shared_ptr<MlmBackend> mlm,
                         std::shared_ptr<EncoderBackend> encoder)
    : impl_(std::make_unique<Impl>()) {
  Impl* impl = impl_.get();
  impl->classifier = std::move(classifier);
  impl->mlm = std::move(mlm);
  impl->encoder = std::move(encoder);

  auto lock_for = [](const auto& backend, std::mutex& mu) {
    return backend && !backend->concurrent_safe() ? &mu : nullptr;
  };
  JsonRoute(impl->server, "/classify", lock_for(impl->classifier, impl->classifier_mu),
            impl->classifier != nullptr, [impl](const json& body) {
              ClassifierInput input;
              if (body.contains("text")) {
                input.text = body.at("text").get<std::string>();
              } else {
                input.text = body.at("premise").get<std::string>();
                input.hypothesis = body.at("hypothesis").get<std::string>();
              }
              return json{{"logits", impl->classifier->Classify(input)}};
            });
  JsonRoute(impl->server, "/mlm_topk", lock_for(impl->mlm, impl->mlm_mu), impl->mlm != nullptr,
            [impl](const json& body) {
              const auto tokens = body.at("token_ids").get<std::vector<TokenId>>();
              const int k = body.at("k").get<int>();
              const MlmTopK topk = impl->mlm->TopK(tokens, k);
              json ids = json::array(), lps = json::array();
              for (const auto& row : topk.rows) {
                json row_ids = json::array(), row_lps = json::array();
                for (const MlmEntry& e : row) {
                  row_ids.push_back(e.token_id);
                  row_lps.push_back(e.log_prob);
                }
                ids.push_back(std::move(row_ids));
                lps.push_back(std::move(row_lps));
              }
              return json{{"token_ids", ids}, {"logprobs", lps}};
            });
  JsonRoute(impl->server, "/embed", lock_for(impl->encoder, impl->encoder_mu),
            impl->encoder != nullptr, [impl](const json& body) {
              return json{{"vector", impl->encoder->Embed(body.at("text").get<std::string>())}};
            });
}

ModelServer::~ModelServer() { Stop(); }

int ModelServer::Start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw BackendUnavailable("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ModelServer::Run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw BackendUnavailable("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void ModelServer::Stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace mlmattack
