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

#include "mlmattack/importance.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mlmattack/errors.h"

namespace mlmattack {

std::string RankingModeName(RankingMode mode) {
  switch (mode) {
    case RankingMode::kMir: return "mir";
    case RankingMode::kLir: return "lir";
    case RankingMode::kRandom: return "random";
  }
  return "mir";
}

std::optional<RankingMode> ParseRankingMode(std::string_view name) {
  if (name == "mir") return RankingMode::kMir;
  if (name == "lir") return RankingMode::kLir;
  if (name == "random") return RankingMode::kRandom;
  return std::nullopt;
}

ImportanceList ImportanceScores(const SegmentedInput& input, LabelId gold,
                                GatewaySession& session,
                                std::optional<double> original_score) {
  const std::vector<std::string>& words = input.words().words;
  if (words.empty()) throw EmptyInput("cannot rank an empty word sequence");

  ImportanceList list;
  list.gold = gold;
  list.original_score = original_score
                            ? *original_score
                            : session.Classify(input.Render(words)).Score(gold);

  std::vector<std::string> masked = words;
  list.entries.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    masked[i] = std::string(kMaskToken);
    const double score = list.original_score - session.Classify(input.Render(masked)).Score(gold);
    masked[i] = words[i];
    const bool rankable = !IsSpecialTokenString(words[i]) && !IsPunctuationOnly(words[i]);
    list.entries.push_back(
        {i, rankable ? score : -std::numeric_limits<double>::infinity()});
  }
  std::stable_sort(list.entries.begin(), list.entries.end(),
                   [](const ImportanceEntry& a, const ImportanceEntry& b) {
                     return a.score > b.score;
                   });
  return list;
}

std::vector<std::size_t> SelectWords(const ImportanceList& list, double epsilon,
                                     const Ranking& ranking) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ConfigError("attack.epsilon", "must lie in (0, 1]");
  }
  std::vector<ImportanceEntry> rankable;
  for (const ImportanceEntry& e : list.entries) {
    if (std::isfinite(e.score)) rankable.push_back(e);
  }
  // Guard against 0.1 * 30 = 3.0000000000000004 rounding up to 4.
  const auto take = std::min(
      rankable.size(),
      static_cast<std::size_t>(std::ceil(epsilon * static_cast<double>(rankable.size()) - 1e-9)));

  std::vector<std::size_t> order;
  order.reserve(rankable.size());
  switch (ranking.mode) {
    case RankingMode::kMir:
      for (const ImportanceEntry& e : rankable) order.push_back(e.word_index);
      break;
    case RankingMode::kLir: {
      std::stable_sort(rankable.begin(), rankable.end(),
                       [](const ImportanceEntry& a, const ImportanceEntry& b) {
                         if (a.score != b.score) return a.score < b.score;
                         return a.word_index < b.word_index;
                       });
      for (const ImportanceEntry& e : rankable) order.push_back(e.word_index);
      break;
    }
    case RankingMode::kRandom: {
      for (const ImportanceEntry& e : rankable) order.push_back(e.word_index);
      std::sort(order.begin(), order.end());
      std::mt19937_64 rng(ranking.seed);
      std::shuffle(order.begin(), order.end(), rng);
      break;
    }
  }
  order.resize(take);
  return order;
}

}  // namespace mlmattack
