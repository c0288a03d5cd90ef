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

#ifndef MLMATTACK_GATEWAY_H_
#define MLMATTACK_GATEWAY_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlmattack/tokenization.h"

namespace mlmattack {

using LabelId = int;

// Dense label ids 0..size()-1 with their names.
class LabelMap {
 public:
  LabelMap() = default;
  explicit LabelMap(std::vector<std::string> names);

  // Parses {"label_name": id, ...}; ids must be exactly 0..n-1.
  static LabelMap FromJsonText(const std::string& text);
  static LabelMap FromFile(const std::filesystem::path& path);
  std::string ToJsonText() const;

  std::optional<LabelId> Find(std::string_view name) const;
  const std::string& Name(LabelId id) const;
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::vector<std::string> names_;
};

enum class LogitKind { kRaw, kSoftmax };

struct Logits {
  std::vector<double> values;
  std::shared_ptr<const LabelMap> label_map;

  LabelId Argmax() const;
  double Score(LabelId label) const { return values.at(static_cast<std::size_t>(label)); }
};

// Single text, or a premise/hypothesis pair when `hypothesis` is set.
struct ClassifierInput {
  std::string text;
  std::optional<std::string> hypothesis;

  bool is_pair() const { return hypothesis.has_value(); }
};

struct MlmEntry {
  TokenId token_id = 0;
  double log_prob = 0.0;

  friend bool operator==(const MlmEntry&, const MlmEntry&) = default;
};

// Per-position candidates, each row sorted by descending log-probability with
// ties broken by ascending token id.
struct MlmTopK {
  std::vector<std::vector<MlmEntry>> rows;
  int k = 0;
};

// Picks the k best entries of a full log-probability row under the MlmTopK
// ordering.
std::vector<MlmEntry> SelectTopK(std::span<const double> log_probs, int k);

// Sorts a row in place under the MlmTopK ordering.
void SortTopKRow(std::vector<MlmEntry>& row);

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  virtual std::vector<double> Classify(const ClassifierInput& input) = 0;
  // Backends returning false are serialized by the gateway.
  virtual bool concurrent_safe() const { return true; }
};

class MlmBackend {
 public:
  virtual ~MlmBackend() = default;
  // One unmasked forward pass over `tokens` (no [CLS]/[SEP]); returns one
  // top-k row per input token.
  virtual MlmTopK TopK(std::span<const TokenId> tokens, int k) = 0;
  virtual std::size_t vocab_size() const = 0;
  // Longest token sequence the backend accepts, excluding specials it adds.
  virtual std::size_t max_tokens() const = 0;
  virtual bool concurrent_safe() const { return true; }
};

class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;
  virtual std::vector<double> Embed(const std::string& text) = 0;
  virtual bool concurrent_safe() const { return true; }
};

struct QueryLedger {
  std::int64_t target_queries = 0;
  std::int64_t mlm_queries = 0;
  std::int64_t embed_queries = 0;
  double wall_time = 0.0;  // seconds since the session opened
};

double CosineSimilarity(std::span<const double> a, std::span<const double> b);

// Token ids fed to a sequence classifier: [CLS] a [SEP] (b [SEP]), truncated
// longest-segment-first to `max_positions`.
struct EncodedInput {
  std::vector<TokenId> input_ids;
  std::vector<TokenId> token_type_ids;
};

EncodedInput EncodeClassifierInput(const ClassifierInput& input,
                                   const Vocabulary& vocab,
                                   std::size_t max_positions);

// [CLS] tokens [SEP]. Throws SequenceTooLong when it would exceed
// `max_positions`.
std::vector<TokenId> EncodeMlmInput(std::span<const TokenId> tokens,
                                    const Vocabulary& vocab,
                                    std::size_t max_positions);

class ModelGateway;

// Query accounting scope for one attack. Not thread-safe; give each
// concurrently attacked sample its own session.
class GatewaySession {
 public:
  Logits Classify(const ClassifierInput& input);
  MlmTopK TopK(const SubwordAlignment& alignment, int k);
  double Similarity(const std::string& a, const std::string& b);
  QueryLedger ledger_snapshot() const;

 private:
  friend class ModelGateway;
  explicit GatewaySession(const ModelGateway* gateway);

  const ModelGateway* gateway_;
  QueryLedger ledger_;
  std::chrono::steady_clock::time_point opened_;
};

struct GatewayOptions {
  std::shared_ptr<ClassifierBackend> classifier;
  std::shared_ptr<MlmBackend> mlm;
  std::shared_ptr<EncoderBackend> encoder;  // optional
  std::shared_ptr<const Vocabulary> vocab;
  LabelMap labels;
  LogitKind logit_kind = LogitKind::kRaw;
};

// Shared access to the three model roles. Immutable after construction and
// safe to share across threads.
class ModelGateway {
 public:
  explicit ModelGateway(GatewayOptions options);

  GatewaySession OpenSession() const { return GatewaySession(this); }

  const Vocabulary& vocab() const { return *vocab_; }
  const LabelMap& labels() const { return *labels_; }
  LogitKind logit_kind() const { return logit_kind_; }
  bool has_mlm() const { return mlm_ != nullptr; }
  bool has_similarity() const { return encoder_ != nullptr; }
  std::size_t mlm_max_tokens() const { return mlm_ ? mlm_->max_tokens() : 0; }

 private:
  friend class GatewaySession;

  std::shared_ptr<ClassifierBackend> classifier_;
  std::shared_ptr<MlmBackend> mlm_;
  std::shared_ptr<EncoderBackend> encoder_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::shared_ptr<const LabelMap> labels_;
  LogitKind logit_kind_;
  // Held only for backends that declare single-flight.
  std::unique_ptr<std::mutex> classifier_mu_, mlm_mu_, encoder_mu_;
};

}  // namespace mlmattack

#endif  // MLMATTACK_GATEWAY_H_
