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

#include "mlmattack/run_config.h"

#include <fstream>
#include <sstream>

#include "mlmattack/bundle.h"
#include "mlmattack/checksum.h"
#include "mlmattack/errors.h"
#include "mlmattack/remote.h"
#include "mlmattack/torchscript_backend.h"

namespace mlmattack {
namespace {

using nlohmann::json;

template <typename T>
T Get(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "missing or has the wrong type");
  }
}

template <typename T>
std::optional<T> GetOptional(const json& doc, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

void Require(bool present, const std::string& field, const std::string& command) {
  if (!present) throw ConfigError(field, "required by '" + command + "'");
}

std::string FileOrUrlChecksum(const std::string& location) {
  if (IsRemoteUrl(location)) return "remote";
  return Sha256File(location);
}

}  // namespace

std::filesystem::path ShippedDataDir() {
#ifdef MLMATTACK_DATA_DIR
  return MLMATTACK_DATA_DIR;
#else
  return "data";
#endif
}

json DefaultRunConfigJson() {
  const AttackConfig a;
  return json{
      {"target", nullptr},
      {"mlm", nullptr},
      {"similarity", nullptr},
      {"vocab", nullptr},
      {"label_map", nullptr},
      {"source_label_map", nullptr},
      {"cased", false},
      {"max_positions", 512},
      {"timeout_s", 60.0},
      {"corpus", nullptr},
      {"records", nullptr},
      {"out", nullptr},
      {"text", nullptr},
      {"premise", nullptr},
      {"hypothesis", nullptr},
      {"attack_side", "premise"},
      {"gold", nullptr},
      {"k", a.k},
      {"epsilon", a.epsilon},
      {"ranking", RankingModeName(a.ranking_mode)},
      {"sim_threshold", nullptr},
      {"sim_gate", SimGateName(a.sim_gate)},
      {"prob_threshold", nullptr},
      {"no_subword", false},
      {"rescore_subwords", false},
      {"max_span", a.subword.max_span},
      {"max_enumeration", a.subword.max_enumeration},
      {"max_target_queries", nullptr},
      {"verify_success", false},
      {"seed", 0},
      {"stopwords", (ShippedDataDir() / "stopwords.txt").string()},
      {"antonyms", nullptr},
      {"sentiment", false},
      {"workers", 1},
      {"max_samples", nullptr},
      {"dimension", nullptr},
      {"k_values", AblationOptions{}.k_values},
      {"prob_thresholds", json::array({nullptr, -8.0, -4.0, -2.0})},
  };
}

json MergeRunConfigJson(json base, const json& overlay) {
  if (!overlay.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& [key, value] : overlay.items()) {
    if (!base.contains(key)) throw ConfigError(key, "unknown configuration field");
    base[key] = value;
  }
  return base;
}

json ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw ConfigError("config", path.string() + ": " + e.what());
  }
}

RunConfig ParseRunConfig(const std::string& command, const json& merged) {
  RunConfig cfg;
  cfg.command = command;
  cfg.echo = merged;
  cfg.echo["command"] = command;

  cfg.target = GetOptional<std::string>(merged, "target").value_or("");
  cfg.mlm = GetOptional<std::string>(merged, "mlm").value_or("");
  cfg.similarity = GetOptional<std::string>(merged, "similarity");
  cfg.vocab = GetOptional<std::string>(merged, "vocab");
  cfg.label_map = GetOptional<std::string>(merged, "label_map");
  cfg.cased = Get<bool>(merged, "cased");
  const auto max_positions = Get<long long>(merged, "max_positions");
  if (max_positions < 3) throw ConfigError("max_positions", "must be >= 3");
  cfg.max_positions = static_cast<std::size_t>(max_positions);
  cfg.timeout_s = Get<double>(merged, "timeout_s");

  cfg.corpus = GetOptional<std::string>(merged, "corpus");
  cfg.records = GetOptional<std::string>(merged, "records");
  cfg.out = GetOptional<std::string>(merged, "out");
  cfg.text = GetOptional<std::string>(merged, "text");
  cfg.premise = GetOptional<std::string>(merged, "premise");
  cfg.hypothesis = GetOptional<std::string>(merged, "hypothesis");
  const auto side = Get<std::string>(merged, "attack_side");
  if (side == "hypothesis") {
    cfg.attack_side = AttackSide::kHypothesis;
  } else if (side != "premise") {
    throw ConfigError("attack_side", "must be premise or hypothesis");
  }
  cfg.gold = GetOptional<std::string>(merged, "gold");

  AttackConfig& a = cfg.attack;
  a.k = Get<int>(merged, "k");
  a.epsilon = Get<double>(merged, "epsilon");
  const auto ranking = ParseRankingMode(Get<std::string>(merged, "ranking"));
  if (!ranking) throw ConfigError("ranking", "must be mir, lir or random");
  a.ranking_mode = *ranking;
  a.sim_threshold = GetOptional<double>(merged, "sim_threshold");
  const auto gate = ParseSimGate(Get<std::string>(merged, "sim_gate"));
  if (!gate) throw ConfigError("sim_gate", "must be post-hoc, in-loop or off");
  a.sim_gate = *gate;
  a.prob_threshold = GetOptional<double>(merged, "prob_threshold");
  a.use_subword_attack = !Get<bool>(merged, "no_subword");
  a.rescore_subwords = Get<bool>(merged, "rescore_subwords");
  a.subword.max_span = Get<int>(merged, "max_span");
  a.subword.max_enumeration = Get<int>(merged, "max_enumeration");
  a.subword.k = a.k;
  a.max_target_queries = GetOptional<std::int64_t>(merged, "max_target_queries");
  a.verify_success = Get<bool>(merged, "verify_success");
  a.seed = Get<std::uint64_t>(merged, "seed");
  a.Validate();

  cfg.stopwords = Get<std::string>(merged, "stopwords");
  cfg.antonyms = GetOptional<std::string>(merged, "antonyms");
  cfg.sentiment = Get<bool>(merged, "sentiment");

  cfg.workers = Get<int>(merged, "workers");
  if (cfg.workers < 1) throw ConfigError("workers", "must be >= 1");
  if (auto m = GetOptional<long long>(merged, "max_samples")) {
    if (*m < 1) throw ConfigError("max_samples", "must be >= 1");
    cfg.max_samples = static_cast<std::size_t>(*m);
  }
  if (auto d = GetOptional<std::string>(merged, "dimension")) {
    cfg.dimension = ParseAblationDimension(*d);
    if (!cfg.dimension) {
      throw ConfigError("dimension",
                        "must be k-sweep, ranking-modes, subword-toggle or prob-threshold");
    }
  }
  cfg.ablation.k_values = Get<std::vector<int>>(merged, "k_values");
  cfg.ablation.prob_thresholds.clear();
  for (const json& t : merged.at("prob_thresholds")) {
    if (t.is_null()) {
      cfg.ablation.prob_thresholds.push_back(std::nullopt);
    } else if (t.is_number()) {
      cfg.ablation.prob_thresholds.push_back(t.get<double>());
    } else {
      throw ConfigError("prob_thresholds", "entries must be numbers or null");
    }
  }

  const bool attacks = command == "attack" || command == "evaluate" || command == "ablate" ||
                       command == "export-adv";
  Require(!cfg.target.empty(), "target", command);
  if (attacks) Require(!cfg.mlm.empty(), "mlm", command);
  if (command == "attack") {
    Require(cfg.gold.has_value(), "gold", command);
    const bool single = cfg.text.has_value();
    const bool pair = cfg.premise.has_value() || cfg.hypothesis.has_value();
    if (single == pair) {
      throw ConfigError("text", "give either --text or both --premise and --hypothesis");
    }
    if (pair) {
      Require(cfg.premise && cfg.hypothesis, cfg.premise ? "hypothesis" : "premise", command);
    }
  }
  if (command == "evaluate" || command == "ablate" || command == "export-adv") {
    Require(cfg.corpus.has_value(), "corpus", command);
    Require(cfg.out.has_value(), "out", command);
  }
  if (command == "ablate") Require(cfg.dimension.has_value(), "dimension", command);
  if (command == "transfer") {
    Require(cfg.records.has_value(), "records", command);
  }
  for (const auto& [field, value] :
       {std::pair{"corpus", cfg.corpus}, std::pair{"records", cfg.records}}) {
    if (value && !std::filesystem::exists(*value)) {
      throw ConfigError(field, "file not found: " + *value);
    }
  }
  return cfg;
}

std::shared_ptr<const FilterConfig> LoadLexicon(const RunConfig& cfg) {
  auto filters = std::make_shared<FilterConfig>();
  const std::filesystem::path shipped = ShippedDataDir() / "stopwords.txt";
  if (std::filesystem::equivalent(cfg.stopwords, shipped) &&
      Sha256File(shipped) != kShippedStopwordsSha256) {
    throw ConfigError("stopwords", "shipped stopword list fails its checksum");
  }
  filters->stopwords = LoadStopwords(cfg.stopwords);
  if (cfg.antonyms) filters->antonyms = AntonymSet::FromFile(*cfg.antonyms);
  filters->use_antonym_filter = cfg.sentiment && cfg.antonyms.has_value();
  return filters;
}

Runtime BuildRuntimeForTarget(const RunConfig& cfg, const std::string& target) {
  Runtime runtime;
  GatewayOptions options;
  RemoteOptions remote;
  remote.timeout_s = cfg.timeout_s;
  json& prov = runtime.provenance;

  std::shared_ptr<const Vocabulary> target_vocab;
  if (IsRemoteUrl(target)) {
    if (!cfg.label_map) throw ConfigError("label_map", "required for a remote target");
    options.classifier = MakeRemoteClassifier(target, remote);
    options.labels = LabelMap::FromFile(*cfg.label_map);
    prov["target"] = {{"location", target},
                      {"label_map_sha256", Sha256File(*cfg.label_map)}};
  } else {
    const ModelBundle bundle = LoadBundle(target);
    if (!bundle.labels) throw ConfigError("target", "bundle has no label_map.json");
    options.classifier = LoadTorchScriptClassifier(bundle);
    options.labels = *bundle.labels;
    options.logit_kind = bundle.info.logit_kind;
    target_vocab = bundle.vocab;
    prov["target"] = {{"location", target}, {"files", BundleChecksums(target)}};
  }

  if (!cfg.mlm.empty()) {
    if (IsRemoteUrl(cfg.mlm)) {
      if (!cfg.vocab) throw ConfigError("vocab", "required for a remote mlm");
      auto vocab = std::make_shared<const Vocabulary>(Vocabulary::FromFile(*cfg.vocab, cfg.cased));
      vocab->RequireMaskAndUnknown();
      options.mlm = MakeRemoteMlm(cfg.mlm, vocab->size(), cfg.max_positions - 2, remote);
      options.vocab = vocab;
      prov["mlm"] = {{"location", cfg.mlm}, {"vocab_sha256", Sha256File(*cfg.vocab)}};
    } else {
      const ModelBundle bundle = LoadBundle(cfg.mlm);
      options.mlm = LoadTorchScriptMlm(bundle);
      options.vocab = bundle.vocab;
      prov["mlm"] = {{"location", cfg.mlm}, {"files", BundleChecksums(cfg.mlm)}};
    }
  } else if (target_vocab) {
    options.vocab = target_vocab;
  } else if (cfg.vocab) {
    options.vocab = std::make_shared<const Vocabulary>(Vocabulary::FromFile(*cfg.vocab, cfg.cased));
  } else {
    throw ConfigError("vocab", "no vocabulary available from mlm or target");
  }

  if (cfg.similarity) {
    if (IsRemoteUrl(*cfg.similarity)) {
      options.encoder = MakeRemoteEncoder(*cfg.similarity, remote);
      prov["similarity"] = {{"location", *cfg.similarity}};
    } else {
      const ModelBundle bundle = LoadBundle(*cfg.similarity);
      options.encoder = LoadTorchScriptEncoder(bundle);
      prov["similarity"] = {{"location", *cfg.similarity},
                            {"files", BundleChecksums(*cfg.similarity)}};
    }
  }
  prov["stopwords_sha256"] = FileOrUrlChecksum(cfg.stopwords);
  if (cfg.antonyms) prov["antonyms_sha256"] = FileOrUrlChecksum(*cfg.antonyms);
  runtime.gateway = std::make_unique<ModelGateway>(std::move(options));
  return runtime;
}

Runtime BuildRuntime(const RunConfig& cfg) { return BuildRuntimeForTarget(cfg, cfg.target); }

}  // namespace mlmattack
