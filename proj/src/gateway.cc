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

#include "mlmattack/gateway.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "mlmattack/errors.h"

namespace mlmattack {
namespace {

bool TopKBefore(const MlmEntry& a, const MlmEntry& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.token_id < b.token_id;
}

template <typename Fn>
auto MaybeLocked(std::mutex* mu, Fn&& fn) {
  if (mu == nullptr) return fn();
  std::lock_guard<std::mutex> lock(*mu);
  return fn();
}

std::vector<TokenId> EncodeSegment(const std::string& text, const Vocabulary& vocab) {
  return AlignSubwords(SplitWords(text, !vocab.cased()), vocab).tokens;
}

}  // namespace

LabelMap::LabelMap(std::vector<std::string> names) : names_(std::move(names)) {}

LabelMap LabelMap::FromJsonText(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("label_map", e.what());
  }
  if (!doc.is_object() || doc.empty()) {
    throw ConfigError("label_map", "expected a non-empty object");
  }
  std::vector<std::string> names(doc.size());
  std::vector<bool> seen(doc.size(), false);
  for (const auto& [name, id] : doc.items()) {
    if (!id.is_number_integer()) {
      throw ConfigError("label_map." + name, "id must be an integer");
    }
    const auto value = id.get<long long>();
    if (value < 0 || static_cast<std::size_t>(value) >= names.size() ||
        seen[static_cast<std::size_t>(value)]) {
      throw ConfigError("label_map." + name, "ids must be a permutation of 0..n-1");
    }
    seen[static_cast<std::size_t>(value)] = true;
    names[static_cast<std::size_t>(value)] = name;
  }
  return LabelMap(std::move(names));
}

LabelMap LabelMap::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("label_map", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJsonText(buffer.str());
}

std::string LabelMap::ToJsonText() const {
  nlohmann::json doc = nlohmann::json::object();
  for (std::size_t i = 0; i < names_.size(); ++i) doc[names_[i]] = i;
  return doc.dump();
}

std::optional<LabelId> LabelMap::Find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<LabelId>(it - names_.begin());
}

const std::string& LabelMap::Name(LabelId id) const {
  return names_.at(static_cast<std::size_t>(id));
}

LabelId Logits::Argmax() const {
  if (values.empty()) throw ShapeMismatch("empty logits");
  // First maximum wins.
  return static_cast<LabelId>(std::max_element(values.begin(), values.end()) -
                              values.begin());
}

std::vector<MlmEntry> SelectTopK(std::span<const double> log_probs, int k) {
  std::vector<MlmEntry> row(log_probs.size());
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    row[i] = {static_cast<TokenId>(i), log_probs[i]};
  }
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), row.size());
  std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep),
                    row.end(), TopKBefore);
  row.resize(keep);
  return row;
}

void SortTopKRow(std::vector<MlmEntry>& row) {
  std::sort(row.begin(), row.end(), TopKBefore);
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("embedding sizes differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

EncodedInput EncodeClassifierInput(const ClassifierInput& input,
                                   const Vocabulary& vocab,
                                   std::size_t max_positions) {
  if (!vocab.cls_id() || !vocab.sep_id()) {
    throw VocabMissingSpecialToken("vocabulary has no [CLS]/[SEP]");
  }
  std::vector<TokenId> first = EncodeSegment(input.text, vocab);
  std::vector<TokenId> second;
  if (input.is_pair()) second = EncodeSegment(*input.hypothesis, vocab);
  const std::size_t specials = input.is_pair() ? 3 : 2;
  if (max_positions < specials + (input.is_pair() ? 2 : 1)) {
    throw SequenceTooLong("max_positions too small for classifier input");
  }
  const std::size_t budget = max_positions - specials;
  while (first.size() + second.size() > budget) {
    if (first.size() >= second.size()) {
      first.pop_back();
    } else {
      second.pop_back();
    }
  }
  EncodedInput encoded;
  encoded.input_ids.push_back(*vocab.cls_id());
  encoded.input_ids.insert(encoded.input_ids.end(), first.begin(), first.end());
  encoded.input_ids.push_back(*vocab.sep_id());
  encoded.token_type_ids.assign(encoded.input_ids.size(), 0);
  if (input.is_pair()) {
    encoded.input_ids.insert(encoded.input_ids.end(), second.begin(), second.end());
    encoded.input_ids.push_back(*vocab.sep_id());
    encoded.token_type_ids.resize(encoded.input_ids.size(), 1);
  }
  return encoded;
}

std::vector<TokenId> EncodeMlmInput(std::span<const TokenId> tokens,
                                    const Vocabulary& vocab,
                                    std::size_t max_positions) {
  if (!vocab.cls_id() || !vocab.sep_id()) {
    throw VocabMissingSpecialToken("vocabulary has no [CLS]/[SEP]");
  }
  if (tokens.size() + 2 > max_positions) {
    throw SequenceTooLong(std::to_string(tokens.size()) +
                          " tokens exceed the MLM positional limit");
  }
  std::vector<TokenId> ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(*vocab.cls_id());
  ids.insert(ids.end(), tokens.begin(), tokens.end());
  ids.push_back(*vocab.sep_id());
  return ids;
}

ModelGateway::ModelGateway(GatewayOptions options)
    : classifier_(std::move(options.classifier)),
      mlm_(std::move(options.mlm)),
      encoder_(std::move(options.encoder)),
      vocab_(std::move(options.vocab)),
      labels_(std::make_shared<const LabelMap>(std::move(options.labels))),
      logit_kind_(options.logit_kind) {
  if (!classifier_) throw ConfigError("target", "no classifier backend");
  if (!vocab_) throw ConfigError("vocab", "no vocabulary");
  if (labels_->empty()) throw ConfigError("label_map", "empty label map");
  if (!classifier_->concurrent_safe()) classifier_mu_ = std::make_unique<std::mutex>();
  if (mlm_ && !mlm_->concurrent_safe()) mlm_mu_ = std::make_unique<std::mutex>();
  if (encoder_ && !encoder_->concurrent_safe()) encoder_mu_ = std::make_unique<std::mutex>();
}

GatewaySession::GatewaySession(const ModelGateway* gateway)
    : gateway_(gateway), opened_(std::chrono::steady_clock::now()) {}

Logits GatewaySession::Classify(const ClassifierInput& input) {
  ++ledger_.target_queries;
  std::vector<double> values = MaybeLocked(gateway_->classifier_mu_.get(), [&] {
    return gateway_->classifier_->Classify(input);
  });
  if (values.size() != gateway_->labels_->size()) {
    throw ShapeMismatch("classifier returned " + std::to_string(values.size()) +
                        " scores for " + std::to_string(gateway_->labels_->size()) +
                        " labels");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ShapeMismatch("classifier returned a non-finite score");
  }
  return Logits{std::move(values), gateway_->labels_};
}

MlmTopK GatewaySession::TopK(const SubwordAlignment& alignment, int k) {
  if (!gateway_->mlm_) throw BackendUnavailable("no masked language model configured");
  if (k < 1) throw Error("mlm top-k requires k >= 1");
  MlmBackend& mlm = *gateway_->mlm_;
  if (alignment.tokens.size() > mlm.max_tokens()) {
    throw SequenceTooLong(std::to_string(alignment.tokens.size()) +
                          " tokens exceed the MLM positional limit of " +
                          std::to_string(mlm.max_tokens()));
  }
  const int clamped = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(k), mlm.vocab_size()));
  ++ledger_.mlm_queries;
  MlmTopK topk = MaybeLocked(gateway_->mlm_mu_.get(),
                             [&] { return mlm.TopK(alignment.tokens, clamped); });
  if (topk.rows.size() != alignment.tokens.size()) {
    throw ShapeMismatch("MLM returned " + std::to_string(topk.rows.size()) +
                        " rows for " + std::to_string(alignment.tokens.size()) +
                        " tokens");
  }
  for (auto& row : topk.rows) {
    for (const MlmEntry& e : row) {
      if (!(e.log_prob <= 0.0) ||
          e.token_id < 0 || static_cast<std::size_t>(e.token_id) >= mlm.vocab_size()) {
        throw ShapeMismatch("MLM returned an invalid (token, log-prob) entry");
      }
    }
    SortTopKRow(row);
    if (row.size() > static_cast<std::size_t>(clamped)) row.resize(static_cast<std::size_t>(clamped));
  }
  topk.k = clamped;
  return topk;
}

double GatewaySession::Similarity(const std::string& a, const std::string& b) {
  if (!gateway_->encoder_) throw BackendUnavailable("no similarity backend configured");
  EncoderBackend& encoder = *gateway_->encoder_;
  auto embed = [&](const std::string& text) {
    ++ledger_.embed_queries;
    return MaybeLocked(gateway_->encoder_mu_.get(), [&] { return encoder.Embed(text); });
  };
  const std::vector<double> ea = embed(a);
  if (a == b) return CosineSimilarity(ea, ea);
  return CosineSimilarity(ea, embed(b));
}

QueryLedger GatewaySession::ledger_snapshot() const {
  QueryLedger snapshot = ledger_;
  snapshot.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - opened_).count();
  return snapshot;
}

}  // namespace mlmattack
