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

#include "mlmattack/bundle.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mlmattack/checksum.h"
#include "mlmattack/errors.h"

namespace mlmattack {

BundleInfo ParseBundleInfo(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bundle", e.what());
  }
  BundleInfo info;
  try {
    const auto max_positions = doc.at("max_positions").get<long long>();
    if (max_positions < 3) throw ConfigError("bundle.max_positions", "must be >= 3");
    info.max_positions = static_cast<std::size_t>(max_positions);
    info.cased = doc.at("cased").get<bool>();
    const std::string kind = doc.value("logit_kind", "raw");
    if (kind == "raw") {
      info.logit_kind = LogitKind::kRaw;
    } else if (kind == "softmax") {
      info.logit_kind = LogitKind::kSoftmax;
    } else {
      throw ConfigError("bundle.logit_kind", "must be raw or softmax");
    }
    info.classifier_file = doc.value("classifier_file", info.classifier_file);
    info.mlm_file = doc.value("mlm_file", info.mlm_file);
    info.encoder_file = doc.value("encoder_file", info.encoder_file);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bundle", e.what());
  }
  return info;
}

ModelBundle LoadBundle(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("bundle", dir.string() + " is not a directory");
  }
  std::ifstream in(dir / "bundle.json");
  if (!in) throw ConfigError("bundle", "missing " + (dir / "bundle.json").string());
  std::stringstream buffer;
  buffer << in.rdbuf();

  ModelBundle bundle;
  bundle.dir = dir;
  bundle.info = ParseBundleInfo(buffer.str());
  bundle.vocab = std::make_shared<const Vocabulary>(
      Vocabulary::FromFile(dir / "vocab.txt", bundle.info.cased));
  bundle.vocab->RequireMaskAndUnknown();
  if (std::filesystem::exists(dir / "label_map.json")) {
    bundle.labels = LabelMap::FromFile(dir / "label_map.json");
  }
  return bundle;
}

std::map<std::string, std::string> BundleChecksums(const std::filesystem::path& dir) {
  std::map<std::string, std::string> sums;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      sums[entry.path().filename().string()] = Sha256File(entry.path());
    }
  }
  return sums;
}

}  // namespace mlmattack
