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

#ifndef MLMATTACK_REMOTE_H_
#define MLMATTACK_REMOTE_H_

#include <cstddef>
#include <memory>
#include <string>

#include "mlmattack/gateway.h"

namespace mlmattack {

// JSON-over-HTTP model protocol, all bodies UTF-8 JSON:
//
//   POST /classify  {"text": s} | {"premise": s, "hypothesis": s} -> {"logits": [f]}
//   POST /mlm_topk  {"token_ids": [i], "k": i} -> {"token_ids": [[i]], "logprobs": [[f]]}
//   POST /embed     {"text": s} -> {"vector": [f]}
//
// /mlm_topk takes the bare word-piece ids; the server adds [CLS]/[SEP] and
// answers one row per input id. Transport and protocol errors raise
// BackendUnavailable.

struct RemoteOptions {
  double timeout_s = 60.0;
};

std::shared_ptr<ClassifierBackend> MakeRemoteClassifier(const std::string& base_url,
                                                        RemoteOptions options = {});
std::shared_ptr<MlmBackend> MakeRemoteMlm(const std::string& base_url, std::size_t vocab_size,
                                          std::size_t max_tokens, RemoteOptions options = {});
std::shared_ptr<EncoderBackend> MakeRemoteEncoder(const std::string& base_url,
                                                  RemoteOptions options = {});

bool IsRemoteUrl(const std::string& location);

// Serves local backends over the protocol above. Any backend may be null; its
// route then answers 404.
class ModelServer {
 public:
  ModelServer(std::shared_ptr<ClassifierBackend> classifier, std::shared_ptr<MlmBackend> mlm,
              std::shared_ptr<EncoderBackend> encoder);
  ~ModelServer();

  ModelServer(const ModelServer&) = delete;
  ModelServer& operator=(const ModelServer&) = delete;

  // Binds (port 0 picks a free port), starts serving on a background thread
  // and returns the bound port.
  int Start(const std::string& host = "127.0.0.1", int port = 0);
  // Binds and serves on the calling thread until Stop().
  void Run(const std::string& host, int port);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mlmattack

#endif  // MLMATTACK_REMOTE_H_
