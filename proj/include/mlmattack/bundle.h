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

#ifndef MLMATTACK_BUNDLE_H_
#define MLMATTACK_BUNDLE_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "mlmattack/gateway.h"
#include "mlmattack/tokenization.h"

namespace mlmattack {

// bundle.json: {"max_positions": int, "cased": bool, "logit_kind": "raw"|"softmax"}
// plus optional file-name overrides.
struct BundleInfo {
  std::size_t max_positions = 512;
  bool cased = false;
  LogitKind logit_kind = LogitKind::kRaw;
  std::string classifier_file = "classifier.pt";
  std::string mlm_file = "mlm.pt";
  std::string encoder_file = "encoder.pt";
};

BundleInfo ParseBundleInfo(const std::string& json_text);

// A model directory: bundle.json, vocab.txt, and label_map.json when the
// bundle carries a classifier.
struct ModelBundle {
  std::filesystem::path dir;
  BundleInfo info;
  std::shared_ptr<const Vocabulary> vocab;
  std::optional<LabelMap> labels;

  std::filesystem::path classifier_path() const { return dir / info.classifier_file; }
  std::filesystem::path mlm_path() const { return dir / info.mlm_file; }
  std::filesystem::path encoder_path() const { return dir / info.encoder_file; }
};

ModelBundle LoadBundle(const std::filesystem::path& dir);

// SHA-256 of every regular file directly inside `dir`, keyed by file name.
std::map<std::string, std::string> BundleChecksums(const std::filesystem::path& dir);

}  // namespace mlmattack

#endif  // MLMATTACK_BUNDLE_H_
