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

// Command-line entry point: attack, evaluate, ablate, transfer, export-adv
// and serve.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlmattack/bundle.h"
#include "mlmattack/errors.h"
#include "mlmattack/evaluation.h"
#include "mlmattack/records.h"
#include "mlmattack/remote.h"
#include "mlmattack/run_config.h"
#include "mlmattack/torchscript_backend.h"

namespace {

using nlohmann::json;
using namespace mlmattack;

std::atomic<bool> g_cancel{false};

void HandleSigint(int) { g_cancel.store(true); }

enum class Kind { kString, kInt, kDouble, kBool, kIntList, kThresholdList };

struct Flag {
  const char* name;  // kebab-case; the config key is the snake_case form
  Kind kind;
  const char* help;
};

// Shared attack and model flags. Each maps to the config key of the same name.
constexpr Flag kFlags[] = {
    {"target", Kind::kString, "Target classifier bundle directory or URL"},
    {"mlm", Kind::kString, "Masked language model bundle directory or URL"},
    {"similarity", Kind::kString, "Sentence encoder bundle directory or URL"},
    {"vocab", Kind::kString, "Vocabulary file for a remote MLM"},
    {"label-map", Kind::kString, "label_map.json for a remote target"},
    {"source-label-map", Kind::kString, "Label map of the model the records were built on"},
    {"cased", Kind::kBool, "Remote vocabulary is cased"},
    {"max-positions", Kind::kInt, "Positional limit of a remote MLM"},
    {"timeout-s", Kind::kDouble, "Remote request timeout in seconds"},
    {"corpus", Kind::kString, "Corpus JSONL"},
    {"records", Kind::kString, "Per-sample records JSONL from an earlier run"},
    {"out", Kind::kString, "Output directory"},
    {"text", Kind::kString, "Single text to attack"},
    {"premise", Kind::kString, "Premise of a pair to attack"},
    {"hypothesis", Kind::kString, "Hypothesis of a pair to attack"},
    {"attack-side", Kind::kString, "premise or hypothesis"},
    {"gold", Kind::kString, "Gold label name"},
    {"k", Kind::kInt, "Candidates per position"},
    {"epsilon", Kind::kDouble, "Fraction of ranked words to attack, in (0, 1]"},
    {"ranking", Kind::kString, "mir, lir or random"},
    {"sim-threshold", Kind::kDouble, "Similarity threshold in [-1, 1]"},
    {"sim-gate", Kind::kString, "post-hoc, in-loop or off"},
    {"prob-threshold", Kind::kDouble, "Candidate log-probability cutoff (<= 0)"},
    {"no-subword", Kind::kBool, "Never attack words split into several pieces"},
    {"rescore-subwords", Kind::kBool, "Re-rank piece combinations with extra MLM passes"},
    {"max-span", Kind::kInt, "Longest piece span attacked"},
    {"max-enumeration", Kind::kInt, "Cap on enumerated piece combinations"},
    {"max-target-queries", Kind::kInt, "Per-sample target query budget"},
    {"verify-success", Kind::kBool, "Re-classify each success once"},
    {"seed", Kind::kInt, "Run seed"},
    {"stopwords", Kind::kString, "Stopword list"},
    {"antonyms", Kind::kString, "Antonym pairs (word TAB word)"},
    {"sentiment", Kind::kBool, "Sentiment task: apply the antonym filter"},
    {"workers", Kind::kInt, "Samples attacked in parallel"},
    {"max-samples", Kind::kInt, "Evaluate a seeded random subset of this size"},
    {"dimension", Kind::kString, "k-sweep, ranking-modes, subword-toggle or prob-threshold"},
    {"k-values", Kind::kIntList, "K values for k-sweep"},
    {"prob-thresholds", Kind::kThresholdList, "Thresholds for prob-threshold ('none' allowed)"},
};

std::string SnakeCase(std::string name) {
  for (char& c : name) {
    if (c == '-') c = '_';
  }
  return name;
}

struct CommandFlags {
  std::string config_path;
  std::map<std::string, std::string> scalars;
  std::map<std::string, bool> switches;
  std::map<std::string, std::vector<std::string>> lists;
  std::map<std::string, CLI::Option*> options;
};

void AddFlags(CLI::App& cmd, CommandFlags& flags) {
  cmd.add_option("--config", flags.config_path, "JSON config file");
  for (const Flag& f : kFlags) {
    const std::string name = std::string("--") + f.name;
    CLI::Option* opt = nullptr;
    switch (f.kind) {
      case Kind::kBool:
        opt = cmd.add_flag(name, flags.switches[f.name], f.help);
        break;
      case Kind::kIntList:
      case Kind::kThresholdList:
        opt = cmd.add_option(name, flags.lists[f.name], f.help)->delimiter(',');
        break;
      default:
        opt = cmd.add_option(name, flags.scalars[f.name], f.help);
        break;
    }
    flags.options[f.name] = opt;
  }
}

json FlagOverrides(const CommandFlags& flags) {
  json overrides = json::object();
  for (const Flag& f : kFlags) {
    if (flags.options.at(f.name)->count() == 0) continue;
    const std::string key = SnakeCase(f.name);
    try {
      switch (f.kind) {
        case Kind::kString: overrides[key] = flags.scalars.at(f.name); break;
        case Kind::kInt: overrides[key] = std::stoll(flags.scalars.at(f.name)); break;
        case Kind::kDouble: overrides[key] = std::stod(flags.scalars.at(f.name)); break;
        case Kind::kBool: overrides[key] = flags.switches.at(f.name); break;
        case Kind::kIntList: {
          json values = json::array();
          for (const auto& v : flags.lists.at(f.name)) values.push_back(std::stoi(v));
          overrides[key] = values;
          break;
        }
        case Kind::kThresholdList: {
          json values = json::array();
          for (const auto& v : flags.lists.at(f.name)) {
            values.push_back(v == "none" ? json(nullptr) : json(std::stod(v)));
          }
          overrides[key] = values;
          break;
        }
      }
    } catch (const std::logic_error&) {
      throw ConfigError(key, "cannot parse flag value");
    }
  }
  return overrides;
}

RunConfig ResolveConfig(const std::string& command, const CommandFlags& flags) {
  json merged = DefaultRunConfigJson();
  if (!flags.config_path.empty()) {
    merged = MergeRunConfigJson(std::move(merged), ReadConfigFile(flags.config_path));
  }
  merged = MergeRunConfigJson(std::move(merged), FlagOverrides(flags));
  RunConfig cfg = ParseRunConfig(command, merged);
  cfg.attack.lexicon = LoadLexicon(cfg);
  return cfg;
}

std::filesystem::path PrepareOut(const RunConfig& cfg) {
  const std::filesystem::path out = *cfg.out;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) {
    throw ConfigError("out", "cannot create output directory " + out.string());
  }
  return out;
}

void WriteJson(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void WriteManifest(const std::filesystem::path& out, const RunConfig& cfg,
                   const Runtime& runtime) {
  json manifest;
  manifest["config"] = cfg.echo;
  manifest["seed"] = cfg.attack.seed;
  manifest["labels"] = runtime.gateway->labels().names();
  manifest["provenance"] = runtime.provenance;
  WriteJson(out / "manifest.json", manifest);
}

void WriteEvaluation(const std::filesystem::path& out, const std::string& suffix,
                     const EvaluationResult& result, const LabelMap& labels) {
  std::vector<json> rows;
  rows.reserve(result.samples.size());
  for (const SampleResult& s : result.samples) {
    rows.push_back(OutcomeToJson(s.sample, s.outcome, labels));
  }
  WriteJsonLines(out / ("records" + suffix + ".jsonl"), rows);
  WriteJson(out / ("summary" + suffix + ".json"), ReportToJson(result.report));
  WriteJson(out / ("timing" + suffix + ".json"), TimingToJson(result));
}

std::vector<TextSample> LoadCorpus(const RunConfig& cfg, const ModelGateway& gateway) {
  std::vector<TextSample> corpus = ReadCorpus(*cfg.corpus, gateway.labels());
  if (cfg.max_samples) corpus = SelectSubset(corpus, *cfg.max_samples, cfg.attack.seed);
  return corpus;
}

EvaluateOptions EvalOptions(const RunConfig& cfg) {
  EvaluateOptions options;
  options.workers = cfg.workers;
  options.cancel = &g_cancel;
  return options;
}

int FinishCode() { return g_cancel.load() ? 130 : 0; }

int RunAttack(const RunConfig& cfg) {
  Runtime runtime = BuildRuntime(cfg);
  const ModelGateway& gateway = *runtime.gateway;
  const auto gold = gateway.labels().Find(*cfg.gold);
  if (!gold) throw ConfigError("gold", "unknown label '" + *cfg.gold + "'");
  const TextSample sample =
      cfg.text ? TextSample::Single("cli", *cfg.text, *gold)
               : TextSample::Pair("cli", *cfg.premise, *cfg.hypothesis, cfg.attack_side, *gold);
  const AttackOutcome outcome = Attack(sample, cfg.attack, gateway);
  json doc = OutcomeToJson(sample, outcome, gateway.labels());
  doc["elapsed_s"] = outcome.elapsed;
  std::cout << doc.dump(2) << std::endl;
  if (cfg.out) {
    const auto out = PrepareOut(cfg);
    WriteJson(out / "outcome.json", doc);
    WriteManifest(out, cfg, runtime);
  }
  return 0;
}

int RunEvaluate(const RunConfig& cfg) {
  Runtime runtime = BuildRuntime(cfg);
  const auto out = PrepareOut(cfg);
  const std::vector<TextSample> corpus = LoadCorpus(cfg, *runtime.gateway);
  spdlog::info("evaluating {} samples", corpus.size());
  const EvaluationResult result = Evaluate(corpus, cfg.attack, *runtime.gateway, EvalOptions(cfg));
  WriteEvaluation(out, "", result, runtime.gateway->labels());
  WriteManifest(out, cfg, runtime);
  std::cout << ReportToJson(result.report).dump(2) << std::endl;
  return FinishCode();
}

int RunAblate(const RunConfig& cfg) {
  Runtime runtime = BuildRuntime(cfg);
  const auto out = PrepareOut(cfg);
  const std::vector<TextSample> corpus = LoadCorpus(cfg, *runtime.gateway);
  json table = json::array();
  for (const AblationVariant& v : AblationVariants(cfg.attack, *cfg.dimension, cfg.ablation)) {
    spdlog::info("ablation variant {}", v.name);
    const EvaluationResult result = Evaluate(corpus, v.cfg, *runtime.gateway, EvalOptions(cfg));
    WriteEvaluation(out, "-" + v.name, result, runtime.gateway->labels());
    table.push_back({{"variant", v.name}, {"report", ReportToJson(result.report)}});
    if (g_cancel.load()) break;
  }
  WriteJson(out / "ablation.json", {{"dimension", AblationDimensionName(*cfg.dimension)},
                                    {"variants", table}});
  WriteManifest(out, cfg, runtime);
  std::cout << table.dump(2) << std::endl;
  return FinishCode();
}

LabelMap SourceLabels(const RunConfig& cfg) {
  if (auto path = cfg.echo.value("source_label_map", json(nullptr)); path.is_string()) {
    return LabelMap::FromFile(path.get<std::string>());
  }
  const auto manifest = std::filesystem::path(*cfg.records).parent_path() / "manifest.json";
  if (std::filesystem::exists(manifest)) {
    const json doc = ReadConfigFile(manifest);
    if (doc.contains("labels")) return LabelMap(doc["labels"].get<std::vector<std::string>>());
  }
  throw ConfigError("source_label_map",
                    "no manifest.json next to the records; give --source-label-map");
}

int RunTransfer(const RunConfig& cfg) {
  Runtime runtime = BuildRuntime(cfg);
  const LabelMap source = SourceLabels(cfg);
  const std::vector<AdversarialRecord> records = ReadAdversarialRecords(*cfg.records, source);
  const TransferReport report = TransferEvaluate(records, source, *runtime.gateway);
  const json doc = TransferToJson(report);
  std::cout << doc.dump(2) << std::endl;
  if (cfg.out) {
    const auto out = PrepareOut(cfg);
    WriteJson(out / "transfer.json", doc);
    WriteManifest(out, cfg, runtime);
  }
  return 0;
}

int RunExport(const RunConfig& cfg) {
  Runtime runtime = BuildRuntime(cfg);
  const auto out = PrepareOut(cfg);
  const std::vector<TextSample> corpus = LoadCorpus(cfg, *runtime.gateway);
  const EvaluationResult result = Evaluate(corpus, cfg.attack, *runtime.gateway, EvalOptions(cfg));
  const std::vector<TextSample> augmented = BuildAdversarialTrainingSet(result.samples);
  WriteCorpus(out / "adv_train.jsonl", augmented, runtime.gateway->labels());
  WriteEvaluation(out, "", result, runtime.gateway->labels());
  WriteManifest(out, cfg, runtime);
  spdlog::info("wrote {} training samples ({} adversarial)", augmented.size(),
               augmented.size() - result.samples.size());
  return FinishCode();
}

int RunServe(const CommandFlags& flags, const std::string& host, int port) {
  json merged = DefaultRunConfigJson();
  if (!flags.config_path.empty()) {
    merged = MergeRunConfigJson(std::move(merged), ReadConfigFile(flags.config_path));
  }
  merged = MergeRunConfigJson(std::move(merged), FlagOverrides(flags));
  std::shared_ptr<ClassifierBackend> classifier;
  std::shared_ptr<MlmBackend> mlm;
  std::shared_ptr<EncoderBackend> encoder;
  if (merged["target"].is_string()) {
    classifier = LoadTorchScriptClassifier(LoadBundle(merged["target"].get<std::string>()));
  }
  if (merged["mlm"].is_string()) {
    mlm = LoadTorchScriptMlm(LoadBundle(merged["mlm"].get<std::string>()));
  }
  if (merged["similarity"].is_string()) {
    encoder = LoadTorchScriptEncoder(LoadBundle(merged["similarity"].get<std::string>()));
  }
  if (!classifier && !mlm && !encoder) {
    throw ConfigError("target", "serve needs at least one of --target, --mlm, --similarity");
  }
  ModelServer server(classifier, mlm, encoder);
  spdlog::info("serving on {}:{}", host, port);
  server.Run(host, port);
  return 0;
}

void ConfigureLogging() {
  auto logger = spdlog::stderr_color_mt("mlmattack");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("MLMATTACK_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

}  // namespace

int main(int argc, char** argv) {
  ConfigureLogging();
  CLI::App app{"Masked-language-model adversarial attacks on text classifiers"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"attack", "Attack one text or pair and print the outcome"},
      {"evaluate", "Attack a corpus and write records, summary and manifest"},
      {"ablate", "Evaluate one corpus under each variant of an ablation dimension"},
      {"transfer", "Replay successful adversarial records on another target"},
      {"export-adv", "Write the corpus plus its successful adversarial samples"},
  };
  std::map<std::string, CommandFlags> flags;
  std::map<std::string, CLI::App*> subcommands;
  for (const Command& c : commands) {
    subcommands[c.name] = app.add_subcommand(c.name, c.help);
    AddFlags(*subcommands[c.name], flags[c.name]);
  }
  CLI::App* serve = app.add_subcommand("serve", "Serve local bundles over the HTTP protocol");
  CommandFlags serve_flags;
  AddFlags(*serve, serve_flags);
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Bind port");

  CLI11_PARSE(app, argc, argv);
  std::signal(SIGINT, HandleSigint);

  try {
    if (serve->parsed()) return RunServe(serve_flags, host, port);
    for (const Command& c : commands) {
      if (!subcommands[c.name]->parsed()) continue;
      const RunConfig cfg = ResolveConfig(c.name, flags[c.name]);
      const std::string name = c.name;
      if (name == "attack") return RunAttack(cfg);
      if (name == "evaluate") return RunEvaluate(cfg);
      if (name == "ablate") return RunAblate(cfg);
      if (name == "transfer") return RunTransfer(cfg);
      if (name == "export-adv") return RunExport(cfg);
    }
  } catch (const ConfigError& e) {
    spdlog::error("invalid configuration: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
