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

#ifndef MLMATTACK_EVALUATION_H_
#define MLMATTACK_EVALUATION_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlmattack/attack.h"
#include "mlmattack/gateway.h"
#include "mlmattack/sample.h"

namespace mlmattack {

// Corpus-level metrics. Rates are unset when their population is empty.
//
// Populations: perturb % and similarity average over counted successes;
// target queries average over non-skipped samples; runtime over all samples.
// A success whose similarity falls below the post-hoc threshold counts as a
// failure.
struct EvaluationReport {
  std::size_t n_samples = 0;
  std::size_t original_correct = 0;  // n_samples - skipped_count
  std::size_t successes = 0;         // flipped and through the similarity gate
  std::size_t skipped_count = 0;
  std::size_t gate_rejected = 0;     // flipped but below the threshold
  std::size_t budget_exceeded = 0;
  std::optional<double> original_accuracy;
  std::optional<double> attacked_accuracy;
  std::optional<double> success_rate;
  std::optional<double> avg_perturb_pct;
  std::optional<double> avg_target_queries;
  std::optional<double> avg_similarity;
  std::optional<double> avg_runtime_s;
  nlohmann::json config_echo;
};

struct SampleResult {
  TextSample sample;
  AttackOutcome outcome;
};

struct EvaluationResult {
  EvaluationReport report;
  std::vector<SampleResult> samples;  // corpus order, completed samples only
};

struct EvaluateOptions {
  int workers = 1;
  // Set to stop picking up new samples; finished samples are kept.
  const std::atomic<bool>* cancel = nullptr;
};

bool CountsAsSuccess(const AttackOutcome& outcome);

EvaluationResult Evaluate(std::span<const TextSample> corpus, const AttackConfig& cfg,
                          const ModelGateway& gateway, const EvaluateOptions& options = {});

EvaluationReport Summarize(std::span<const SampleResult> results, const AttackConfig& cfg);

nlohmann::json AttackConfigToJson(const AttackConfig& cfg);
// Summary without runtime, stable across reruns.
nlohmann::json ReportToJson(const EvaluationReport& report);
nlohmann::json TimingToJson(const EvaluationResult& result);

// Up to `max_samples` samples drawn without replacement, kept in corpus order.
std::vector<TextSample> SelectSubset(std::span<const TextSample> corpus,
                                     std::size_t max_samples, std::uint64_t seed);

enum class AblationDimension { kKSweep, kRankingModes, kSubwordToggle, kProbThreshold };

std::optional<AblationDimension> ParseAblationDimension(std::string_view name);
std::string AblationDimensionName(AblationDimension dimension);

struct AblationOptions {
  std::vector<int> k_values = {1, 4, 8, 16, 32, 48};
  // Unset entry means "no threshold".
  std::vector<std::optional<double>> prob_thresholds = {std::nullopt, -8.0, -4.0, -2.0};
};

struct AblationVariant {
  std::string name;
  AttackConfig cfg;
};

std::vector<AblationVariant> AblationVariants(const AttackConfig& base,
                                              AblationDimension dimension,
                                              const AblationOptions& options = {});

struct AblationRow {
  std::string name;
  EvaluationResult result;
};

std::vector<AblationRow> Ablate(std::span<const TextSample> corpus, const AttackConfig& base,
                                AblationDimension dimension, const ModelGateway& gateway,
                                const AblationOptions& ablation = {},
                                const EvaluateOptions& options = {});

struct AdversarialRecord;

struct TransferReport {
  std::size_t n_records = 0;  // counted successes replayed on the target
  std::size_t correct = 0;
  std::optional<double> accuracy;
};

// Replays counted successful adversarial inputs built against one model on
// another. Throws LabelMapMismatch when the label maps differ.
TransferReport TransferEvaluate(std::span<const AdversarialRecord> records,
                                const LabelMap& source_labels, const ModelGateway& target);

nlohmann::json TransferToJson(const TransferReport& report);

// Original samples followed by one "<id>-adv" sample per counted success.
std::vector<TextSample> BuildAdversarialTrainingSet(std::span<const SampleResult> results);

std::vector<TextSample> ExportAdversarialTrainingSet(std::span<const TextSample> train_corpus,
                                                     const AttackConfig& cfg,
                                                     const ModelGateway& gateway,
                                                     const std::filesystem::path& out_path,
                                                     const EvaluateOptions& options = {});

}  // namespace mlmattack

#endif  // MLMATTACK_EVALUATION_H_
