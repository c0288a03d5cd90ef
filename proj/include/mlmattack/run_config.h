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

#ifndef MLMATTACK_RUN_CONFIG_H_
#define MLMATTACK_RUN_CONFIG_H_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlmattack/attack.h"
#include "mlmattack/evaluation.h"
#include "mlmattack/gateway.h"

namespace mlmattack {

inline constexpr std::string_view kShippedStopwordsSha256 =
    "019f104ba2ed07436d05f9cdd3383034ad66014edc27fc651f837e1a038b6451";

std::filesystem::path ShippedDataDir();

// Resolved run configuration. Sources merge as defaults < config file <
// command-line flags; `echo` keeps the merged document for the manifest.
struct RunConfig {
  std::string command;

  std::string target;  // bundle directory or http(s) URL
  std::string mlm;
  std::optional<std::string> similarity;
  // Needed when a role is served remotely.
  std::optional<std::string> vocab;
  std::optional<std::string> label_map;
  bool cased = false;
  std::size_t max_positions = 512;
  double timeout_s = 60.0;

  std::optional<std::string> corpus;
  std::optional<std::string> records;
  std::optional<std::string> out;

  std::optional<std::string> text;
  std::optional<std::string> premise;
  std::optional<std::string> hypothesis;
  AttackSide attack_side = AttackSide::kPremise;
  std::optional<std::string> gold;

  AttackConfig attack;
  std::string stopwords;
  std::optional<std::string> antonyms;
  bool sentiment = false;

  int workers = 1;
  std::optional<std::size_t> max_samples;

  std::optional<AblationDimension> dimension;
  AblationOptions ablation;

  nlohmann::json echo;
};

nlohmann::json DefaultRunConfigJson();

// Overlays `overlay` onto `base`. Unknown keys raise ConfigError.
nlohmann::json MergeRunConfigJson(nlohmann::json base, const nlohmann::json& overlay);

nlohmann::json ReadConfigFile(const std::filesystem::path& path);

// Parses a merged document (field errors name the key) and checks the fields
// `command` needs.
RunConfig ParseRunConfig(const std::string& command, const nlohmann::json& merged);

// Stopwords, antonyms and the antonym switch; default stopwords are
// checksum-verified.
std::shared_ptr<const FilterConfig> LoadLexicon(const RunConfig& cfg);

struct Runtime {
  std::unique_ptr<ModelGateway> gateway;
  nlohmann::json provenance;  // per-role location and file checksums
};

// Loads local bundles or connects remote roles for the target classifier,
// MLM and optional similarity encoder.
Runtime BuildRuntime(const RunConfig& cfg);
// Same, with another classifier location as the target.
Runtime BuildRuntimeForTarget(const RunConfig& cfg, const std::string& target);

}  // namespace mlmattack

#endif  // MLMATTACK_RUN_CONFIG_H_
