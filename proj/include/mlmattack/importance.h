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

#ifndef MLMATTACK_IMPORTANCE_H_
#define MLMATTACK_IMPORTANCE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlmattack/gateway.h"
#include "mlmattack/sample.h"

namespace mlmattack {

enum class RankingMode { kMir, kLir, kRandom };

struct Ranking {
  RankingMode mode = RankingMode::kMir;
  std::uint64_t seed = 0;  // used by kRandom only

  static Ranking Mir() { return {RankingMode::kMir, 0}; }
  static Ranking Lir() { return {RankingMode::kLir, 0}; }
  static Ranking Random(std::uint64_t seed) { return {RankingMode::kRandom, seed}; }
};

std::string RankingModeName(RankingMode mode);
std::optional<RankingMode> ParseRankingMode(std::string_view name);

struct ImportanceEntry {
  std::size_t word_index = 0;
  double score = 0.0;  // -inf for special tokens and punctuation
};

// Sorted by descending score, ties by ascending word index.
struct ImportanceList {
  std::vector<ImportanceEntry> entries;
  LabelId gold = 0;
  double original_score = 0.0;  // gold output on the unmodified input
};

// Drop of the gold output when a word is replaced by one [MASK] token.
// Issues one classify call per word, plus one for the unmodified input unless
// `original_score` is supplied by a caller that already paid for it.
ImportanceList ImportanceScores(const SegmentedInput& input, LabelId gold,
                                GatewaySession& session,
                                std::optional<double> original_score = std::nullopt);

// Word indices to attack, in attack order. Takes ceil(epsilon * n) of the n
// rankable words.
std::vector<std::size_t> SelectWords(const ImportanceList& list, double epsilon,
                                     const Ranking& ranking);

}  // namespace mlmattack

#endif  // MLMATTACK_IMPORTANCE_H_
