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

#ifndef MLMATTACK_RECORDS_H_
#define MLMATTACK_RECORDS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlmattack/attack.h"
#include "mlmattack/gateway.h"
#include "mlmattack/sample.h"

namespace mlmattack {

// Corpus JSONL: {"id","text","label"} or
// {"id","premise","hypothesis","attack_side","label"}. "label" is a label
// name or an integer id.
TextSample SampleFromJson(const nlohmann::json& j, const LabelMap& labels);
nlohmann::json SampleToJson(const TextSample& sample, const LabelMap& labels);

std::vector<TextSample> ReadCorpus(const std::filesystem::path& path, const LabelMap& labels);
void WriteCorpus(const std::filesystem::path& path, std::span<const TextSample> samples,
                 const LabelMap& labels);

// Deterministic per-sample record; timing is kept out so reruns compare equal.
nlohmann::json OutcomeToJson(const TextSample& sample, const AttackOutcome& outcome,
                             const LabelMap& labels);

// The parts of a stored record needed to replay its adversarial input.
struct AdversarialRecord {
  std::string id;
  AttackStatus status = AttackStatus::kFailure;
  bool sim_gate_passed = true;
  LabelId gold = 0;
  ClassifierInput adversarial_input;
};

AdversarialRecord AdversarialRecordFromJson(const nlohmann::json& j, const LabelMap& labels);
std::vector<AdversarialRecord> ReadAdversarialRecords(const std::filesystem::path& path,
                                                      const LabelMap& labels);

std::vector<nlohmann::json> ReadJsonLines(const std::filesystem::path& path);
void WriteJsonLines(const std::filesystem::path& path, std::span<const nlohmann::json> rows);

}  // namespace mlmattack

#endif  // MLMATTACK_RECORDS_H_
