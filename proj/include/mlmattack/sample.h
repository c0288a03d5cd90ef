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

#ifndef MLMATTACK_SAMPLE_H_
#define MLMATTACK_SAMPLE_H_

#include <optional>
#include <span>
#include <string>

#include "mlmattack/gateway.h"
#include "mlmattack/tokenization.h"

namespace mlmattack {

enum class AttackSide { kPremise, kHypothesis };

// One corpus item. Exactly one of `text` or the premise/hypothesis pair is
// populated; `pair` tells which.
struct TextSample {
  std::string id;
  bool pair = false;
  std::string text;
  std::string premise;
  std::string hypothesis;
  AttackSide attack_side = AttackSide::kPremise;
  LabelId gold = 0;

  static TextSample Single(std::string id, std::string text, LabelId gold);
  static TextSample Pair(std::string id, std::string premise, std::string hypothesis,
                         AttackSide side, LabelId gold);

  const std::string& attacked_text() const;
  ClassifierInput AsClassifierInput() const;
};

// The word sequence of the attackable segment plus whatever else must be sent
// to the classifier unchanged.
class SegmentedInput {
 public:
  static SegmentedInput FromSample(const TextSample& sample, bool lowercase);

  const WordSequence& words() const { return words_; }
  // Classifier input with the attackable segment rendered from `words`.
  ClassifierInput Render(std::span<const std::string> words) const;

 private:
  WordSequence words_;
  std::optional<std::string> other_;
  bool attacked_is_first_ = true;
};

}  // namespace mlmattack

#endif  // MLMATTACK_SAMPLE_H_
