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

#include "mlmattack/records.h"

#include <fstream>

#include "mlmattack/errors.h"

namespace mlmattack {
namespace {

using nlohmann::json;

LabelId ParseLabel(const json& value, const LabelMap& labels, const std::string& where) {
  if (value.is_string()) {
    if (auto id = labels.Find(value.get<std::string>())) return *id;
    throw ConfigError(where + ".label", "unknown label '" + value.get<std::string>() + "'");
  }
  if (value.is_number_integer()) {
    const auto id = value.get<long long>();
    if (id >= 0 && static_cast<std::size_t>(id) < labels.size()) return static_cast<LabelId>(id);
  }
  throw ConfigError(where + ".label", "label must be a known name or id");
}

std::string RequireString(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ConfigError(where + "." + key, "missing or not a string");
  }
  return it->get<std::string>();
}

json InputToJson(const ClassifierInput& input) {
  if (!input.is_pair()) return {{"text", input.text}};
  return {{"premise", input.text}, {"hypothesis", *input.hypothesis}};
}

}  // namespace

TextSample SampleFromJson(const json& j, const LabelMap& labels) {
  if (!j.is_object()) throw ConfigError("sample", "expected a JSON object");
  std::string id;
  if (auto it = j.find("id"); it != j.end() && it->is_string()) {
    id = it->get<std::string>();
  } else if (it != j.end() && it->is_number_integer()) {
    id = std::to_string(it->get<long long>());
  } else {
    throw ConfigError("sample.id", "missing");
  }
  const std::string where = "sample[" + id + "]";
  if (!j.contains("label")) throw ConfigError(where + ".label", "missing");
  const LabelId gold = ParseLabel(j["label"], labels, where);
  const bool has_text = j.contains("text");
  const bool has_pair = j.contains("premise") || j.contains("hypothesis");
  if (has_text == has_pair) {
    throw ConfigError(where, "exactly one of text or premise/hypothesis must be set");
  }
  if (has_text) return TextSample::Single(std::move(id), RequireString(j, "text", where), gold);
  AttackSide side = AttackSide::kPremise;
  if (j.contains("attack_side")) {
    const std::string s = RequireString(j, "attack_side", where);
    if (s == "hypothesis") {
      side = AttackSide::kHypothesis;
    } else if (s != "premise") {
      throw ConfigError(where + ".attack_side", "must be premise or hypothesis");
    }
  }
  return TextSample::Pair(std::move(id), RequireString(j, "premise", where),
                          RequireString(j, "hypothesis", where), side, gold);
}

json SampleToJson(const TextSample& sample, const LabelMap& labels) {
  json j;
  j["id"] = sample.id;
  if (sample.pair) {
    j["premise"] = sample.premise;
    j["hypothesis"] = sample.hypothesis;
    j["attack_side"] = sample.attack_side == AttackSide::kPremise ? "premise" : "hypothesis";
  } else {
    j["text"] = sample.text;
  }
  j["label"] = labels.Name(sample.gold);
  return j;
}

std::vector<json> ReadJsonLines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("corpus", "cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no), e.what());
    }
  }
  return rows;
}

void WriteJsonLines(const std::filesystem::path& path, std::span<const json> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const json& row : rows) out << row.dump() << '\n';
}

std::vector<TextSample> ReadCorpus(const std::filesystem::path& path, const LabelMap& labels) {
  std::vector<TextSample> samples;
  for (const json& row : ReadJsonLines(path)) samples.push_back(SampleFromJson(row, labels));
  return samples;
}

void WriteCorpus(const std::filesystem::path& path, std::span<const TextSample> samples,
                 const LabelMap& labels) {
  std::vector<json> rows;
  rows.reserve(samples.size());
  for (const TextSample& s : samples) rows.push_back(SampleToJson(s, labels));
  WriteJsonLines(path, rows);
}

json OutcomeToJson(const TextSample& sample, const AttackOutcome& outcome,
                   const LabelMap& labels) {
  json j;
  j["id"] = sample.id;
  j["status"] = AttackStatusName(outcome.status);
  j["gold"] = labels.Name(outcome.gold);
  j["original_prediction"] = labels.Name(outcome.original_prediction);
  j["final_prediction"] = labels.Name(outcome.final_prediction);
  if (sample.pair) {
    j["attack_side"] = sample.attack_side == AttackSide::kPremise ? "premise" : "hypothesis";
  }
  j["original"] = Detokenize(outcome.original.words);
  j["adversarial"] = Detokenize(outcome.adversarial.words);
  j["adversarial_input"] = InputToJson(outcome.adversarial_input);
  j["n_words"] = outcome.original.size();
  j["selected"] = outcome.selected;
  j["perturbed_indices"] = outcome.perturbed_indices;
  j["perturb_pct"] = PerturbPercentage(outcome);
  j["target_queries"] = outcome.target_queries;
  j["mlm_queries"] = outcome.mlm_queries;
  j["candidates_tried"] = outcome.candidates_tried;
  j["verification_queries"] = outcome.verification_queries;
  j["gold_score_trace"] = outcome.gold_score_trace;
  j["similarity"] = outcome.similarity ? json(*outcome.similarity) : json(nullptr);
  j["sim_gate_passed"] = outcome.sim_gate_passed;
  j["budget_exceeded"] = outcome.budget_exceeded;
  return j;
}

AdversarialRecord AdversarialRecordFromJson(const json& j, const LabelMap& labels) {
  AdversarialRecord r;
  const std::string where = "record";
  r.id = RequireString(j, "id", where);
  const auto status = ParseAttackStatus(RequireString(j, "status", where));
  if (!status) throw ConfigError(where + ".status", "unknown status");
  r.status = *status;
  r.sim_gate_passed = j.value("sim_gate_passed", true);
  r.gold = ParseLabel(j.at("gold"), labels, where);
  const json& input = j.at("adversarial_input");
  if (input.contains("text")) {
    r.adversarial_input.text = RequireString(input, "text", where);
  } else {
    r.adversarial_input.text = RequireString(input, "premise", where);
    r.adversarial_input.hypothesis = RequireString(input, "hypothesis", where);
  }
  return r;
}

std::vector<AdversarialRecord> ReadAdversarialRecords(const std::filesystem::path& path,
                                                      const LabelMap& labels) {
  std::vector<AdversarialRecord> records;
  for (const json& row : ReadJsonLines(path)) {
    records.push_back(AdversarialRecordFromJson(row, labels));
  }
  return records;
}

}  // namespace mlmattack
