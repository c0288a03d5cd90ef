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

#ifndef MLMATTACK_ATTACK_H_
#define MLMATTACK_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlmattack/candidates.h"
#include "mlmattack/gateway.h"
#include "mlmattack/importance.h"
#include "mlmattack/sample.h"

namespace mlmattack {

enum class SimGate { kPostHoc, kInLoop, kOff };

std::string SimGateName(SimGate gate);
std::optional<SimGate> ParseSimGate(std::string_view name);

inline constexpr double kDefaultSingleSimThreshold = 0.4;
inline constexpr double kDefaultPairSimThreshold = 0.2;

struct AttackConfig {
  int k = 48;  // 0 disables candidate generation entirely
  double epsilon = 1.0;
  RankingMode ranking_mode = RankingMode::kMir;
  // Unset means 0.4 for single texts and 0.2 for pairs.
  std::optional<double> sim_threshold;
  SimGate sim_gate = SimGate::kPostHoc;
  std::optional<double> prob_threshold;
  SubwordSearchConfig subword;
  bool use_subword_attack = true;
  // One extra MLM pass per combination candidate.
  bool rescore_subwords = false;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> max_target_queries;
  // Re-classify successful adversarial inputs once (ledgered).
  bool verify_success = false;
  // Stopwords, antonyms and the antonym switch. prob_threshold above wins
  // over the one stored here.
  std::shared_ptr<const FilterConfig> lexicon;

  // Throws ConfigError naming the offending field.
  void Validate() const;
  double EffectiveSimThreshold(bool pair) const;
};

// Per-sample seed derived from the run seed and the sample id.
std::uint64_t DeriveSampleSeed(std::uint64_t run_seed, std::string_view sample_id);

enum class AttackStatus { kSuccess, kFailure, kSkipped };

std::string AttackStatusName(AttackStatus status);
std::optional<AttackStatus> ParseAttackStatus(std::string_view name);

struct AttackOutcome {
  AttackStatus status = AttackStatus::kFailure;
  WordSequence original;     // words of the attacked segment
  WordSequence adversarial;  // final words; best effort on failure
  ClassifierInput adversarial_input;
  std::vector<std::size_t> selected;           // word list L, attack order
  std::vector<std::size_t> perturbed_indices;  // ascending
  LabelId gold = 0;
  LabelId original_prediction = 0;
  LabelId final_prediction = 0;
  std::int64_t target_queries = 0;
  std::int64_t mlm_queries = 0;
  std::int64_t candidates_tried = 0;
  std::int64_t verification_queries = 0;
  // Gold output of the committed sequence, starting with the original input.
  std::vector<double> gold_score_trace;
  std::optional<double> similarity;
  bool sim_gate_passed = true;
  bool budget_exceeded = false;
  double elapsed = 0.0;  // seconds
};

AttackOutcome Attack(const TextSample& sample, const AttackConfig& cfg,
                     const ModelGateway& gateway);

// Replaced words as a percentage of the attacked segment's words.
double PerturbPercentage(const AttackOutcome& outcome);

}  // namespace mlmattack

#endif  // MLMATTACK_ATTACK_H_
