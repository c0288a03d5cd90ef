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

#include <torch/script.h>

#include <mutex>

#include "mlmattack/errors.h"

namespace mlmattack {
namespace {

torch::jit::Module LoadModule(const std::filesystem::path& path) {
  // Profiling-executor rewrites can change float results between early and
  // later calls; keep every call on the same graph.
  static std::once_flag once;
  std::call_once(once, [] { torch::jit::setGraphExecutorOptimize(false); });
  try {
    torch::jit::Module module = torch::jit::load(path.string());
    module.eval();
    return module;
  } catch (const c10::Error& e) {
    throw BackendUnavailable("cannot load " + path.string() + ": " + e.what_without_backtrace());
  }
}

torch::Tensor IdsTensor(const std::vector<TokenId>& ids) {
  return torch::tensor(std::vector<int64_t>(ids.begin(), ids.end()), torch::kInt64)
      .unsqueeze(0);
}

std::vector<double> ToVector(torch::Tensor t) {
  t = t.to(torch::kFloat64).contiguous().reshape({-1});
  const double* data = t.data_ptr<double>();
  return {data, data + t.numel()};
}

template <typename Fn>
auto Guarded(const char* what, Fn&& fn) {
  try {
    c10::InferenceMode guard;
    return fn();
  } catch (const c10::Error& e) {
    throw BackendUnavailable(std::string(what) + " forward failed: " +
                             e.what_without_backtrace());
  }
}

class TorchScriptClassifier : public ClassifierBackend {
 public:
  explicit TorchScriptClassifier(const ModelBundle& bundle)
      : module_(LoadModule(bundle.classifier_path())),
        vocab_(bundle.vocab),
        max_positions_(bundle.info.max_positions) {}

  std::vector<double> Classify(const ClassifierInput& input) override {
    const EncodedInput encoded = EncodeClassifierInput(input, *vocab_, max_positions_);
    return Guarded("classifier", [&] {
      torch::Tensor ids = IdsTensor(encoded.input_ids);
      torch::Tensor mask = torch::ones_like(ids);
      torch::Tensor types = IdsTensor(encoded.token_type_ids);
      return ToVector(module_.forward({ids, mask, types}).toTensor());
    });
  }

 private:
  torch::jit::Module module_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::size_t max_positions_;
};

class TorchScriptMlm : public MlmBackend {
 public:
  explicit TorchScriptMlm(const ModelBundle& bundle)
      : module_(LoadModule(bundle.mlm_path())),
        vocab_(bundle.vocab),
        max_positions_(bundle.info.max_positions) {}

  MlmTopK TopK(std::span<const TokenId> tokens, int k) override {
    const std::vector<TokenId> ids = EncodeMlmInput(tokens, *vocab_, max_positions_);
    return Guarded("mlm", [&] {
      torch::Tensor input = IdsTensor(ids);
      torch::Tensor logits = module_.forward({input, torch::ones_like(input)}).toTensor();
      if (logits.dim() != 3 || logits.size(1) != static_cast<int64_t>(ids.size()) ||
          logits.size(2) != static_cast<int64_t>(vocab_->size())) {
        throw ShapeMismatch("mlm graph output has unexpected shape");
      }
      torch::Tensor log_probs =
          torch::log_softmax(logits[0].to(torch::kFloat64), /*dim=*/-1).contiguous();
      MlmTopK topk;
      topk.k = k;
      const auto vocab_size = static_cast<std::size_t>(log_probs.size(1));
      const double* data = log_probs.data_ptr<double>();
      // Row 0 is [CLS]; the last row is [SEP].
      for (std::size_t pos = 1; pos + 1 < ids.size(); ++pos) {
        topk.rows.push_back(
            SelectTopK(std::span<const double>(data + pos * vocab_size, vocab_size), k));
      }
      return topk;
    });
  }

  std::size_t vocab_size() const override { return vocab_->size(); }
  std::size_t max_tokens() const override { return max_positions_ - 2; }

 private:
  torch::jit::Module module_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::size_t max_positions_;
};

class TorchScriptEncoder : public EncoderBackend {
 public:
  explicit TorchScriptEncoder(const ModelBundle& bundle)
      : module_(LoadModule(bundle.encoder_path())),
        vocab_(bundle.vocab),
        max_positions_(bundle.info.max_positions) {}

  std::vector<double> Embed(const std::string& text) override {
    std::vector<TokenId> tokens = AlignSubwords(SplitWords(text, !vocab_->cased()), *vocab_).tokens;
    if (tokens.size() + 2 > max_positions_) tokens.resize(max_positions_ - 2);
    const std::vector<TokenId> ids = EncodeMlmInput(tokens, *vocab_, max_positions_);
    return Guarded("encoder", [&] {
      torch::Tensor input = IdsTensor(ids);
      return ToVector(module_.forward({input, torch::ones_like(input)}).toTensor());
    });
  }

 private:
  torch::jit::Module module_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::size_t max_positions_;
};

}  // namespace

std::shared_ptr<ClassifierBackend> LoadTorchScriptClassifier(const ModelBundle& bundle) {
  return std::make_shared<TorchScriptClassifier>(bundle);
}

std::shared_ptr<MlmBackend> LoadTorchScriptMlm(const ModelBundle& bundle) {
  return std::make_shared<TorchScriptMlm>(bundle);
}

std::shared_ptr<EncoderBackend> LoadTorchScriptEncoder(const ModelBundle& bundle) {
  return std::make_shared<TorchScriptEncoder>(bundle);
}

}  // namespace mlmattack
