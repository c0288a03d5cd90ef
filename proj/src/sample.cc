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

#include "mlmattack/sample.h"

namespace mlmattack {

TextSample TextSample::Single(std::string id, std::string text, LabelId gold) {
  TextSample s;
  s.id = std::move(id);
  s.text = std::move(text);
  s.gold = gold;
  return s;
}

TextSample TextSample::Pair(std::string id, std::string premise, std::string hypothesis,
                            AttackSide side, LabelId gold) {
  TextSample s;
  s.id = std::move(id);
  s.pair = true;
  s.premise = std::move(premise);
  s.hypothesis = std::move(hypothesis);
  s.attack_side = side;
  s.gold = gold;
  return s;
}

const std::string& TextSample::attacked_text() const {
  if (!pair) return text;
  return attack_side == AttackSide::kPremise ? premise : hypothesis;
}

ClassifierInput TextSample::AsClassifierInput() const {
  if (!pair) return {text, std::nullopt};
  return {premise, hypothesis};
}

SegmentedInput SegmentedInput::FromSample(const TextSample& sample, bool lowercase) {
  SegmentedInput input;
  input.words_ = SplitWords(sample.attacked_text(), lowercase);
  if (sample.pair) {
    const bool premise = sample.attack_side == AttackSide::kPremise;
    input.attacked_is_first_ = premise;
    input.other_ = Detokenize(
        SplitWords(premise ? sample.hypothesis : sample.premise, lowercase).words);
  }
  return input;
}

ClassifierInput SegmentedInput::Render(std::span<const std::string> words) const {
  std::string attacked = Detokenize(words);
  if (!other_) return {std::move(attacked), std::nullopt};
  if (attacked_is_first_) return {std::move(attacked), *other_};
  return {*other_, std::move(attacked)};
}

}  // namespace mlmattack
