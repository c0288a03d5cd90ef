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

#include "mlmattack/attack.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlmattack/errors.h"

namespace mlmattack {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keeps only words whose whole span fits in `max_tokens`; later words get an
// empty span and are never attacked.
SubwordAlignment TruncateAlignment(SubwordAlignment alignment, std::size_t max_tokens) {
  if (alignment.tokens.size() <= max_tokens) return alignment;
  std::size_t keep = 0;
  for (Span& span : alignment.spans) {
    if (span.end <= max_tokens) {
      keep = span.end;
    } else {
      span = {keep, keep};
    }
  }
  alignment.tokens.resize(keep);
  return alignment;
}

class AttackRun {
 public:
  AttackRun(const TextSample& sample, const AttackConfig& cfg, const ModelGateway& gateway)
      : sample_(sample),
        cfg_(cfg),
        gateway_(gateway),
        session_(gateway.OpenSession()),
        input_(SegmentedInput::FromSample(sample, !gateway.vocab().cased())) {
    filters_ = cfg.lexicon ? *cfg.lexicon : FilterConfig{};
    if (cfg.prob_threshold) filters_.prob_threshold = cfg.prob_threshold;
  }

  AttackOutcome Run() {
    out_.gold = sample_.gold;
    out_.original = input_.words();
    out_.adversarial = input_.words();
    out_.adversarial_input = input_.Render(out_.original.words);

    const Logits original = session_.Classify(out_.adversarial_input);
    out_.original_prediction = original.Argmax();
    out_.final_prediction = out_.original_prediction;
    out_.gold_score_trace.push_back(original.Score(sample_.gold));
    if (out_.original_prediction != sample_.gold) {
      out_.status = AttackStatus::kSkipped;
      return Finish(/*compute_similarity=*/false);
    }
    out_.status = AttackStatus::kFailure;
    if (input_.words().empty()) return Finish(false);

    const std::int64_t n = static_cast<std::int64_t>(input_.words().size());
    if (cfg_.max_target_queries && *cfg_.max_target_queries < n + 1) {
      out_.budget_exceeded = true;
      return Finish(true);
    }
    const ImportanceList importance =
        ImportanceScores(input_, sample_.gold, session_, original.Score(sample_.gold));
    const Ranking ranking{cfg_.ranking_mode, DeriveSampleSeed(cfg_.seed, sample_.id)};
    out_.selected = SelectWords(importance, cfg_.epsilon, ranking);

    if (cfg_.k == 0 || out_.selected.empty()) return Finish(true);

    const SubwordAlignment alignment = TruncateAlignment(
        AlignSubwords(input_.words(), gateway_.vocab()), gateway_.mlm_max_tokens());
    const MlmTopK topk = session_.TopK(alignment, cfg_.k);

    std::vector<std::string> current = input_.words().words;
    double current_score = original.Score(sample_.gold);
    for (std::size_t j : out_.selected) {
      const std::vector<Candidate> candidates = CandidatesFor(j, alignment, topk);
      std::optional<std::size_t> best;
      double best_score = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (BudgetSpent()) {
          out_.budget_exceeded = true;
          return Finish(true);
        }
        std::vector<std::string> trial = current;
        trial[j] = candidates[c].surface;
        ++out_.candidates_tried;
        const ClassifierInput rendered = input_.Render(trial);
        const Logits logits = session_.Classify(rendered);
        const LabelId predicted = logits.Argmax();
        if (predicted != sample_.gold) {
          if (cfg_.sim_gate != SimGate::kInLoop || PassesInLoopGate(trial)) {
            out_.status = AttackStatus::kSuccess;
            out_.final_prediction = predicted;
            Commit(j, std::move(trial), rendered, std::nullopt);
            if (cfg_.verify_success) Verify();
            return Finish(true);
          }
          continue;
        }
        const double score = logits.Score(sample_.gold);
        if (score < best_score) {
          best_score = score;
          best = c;
        }
      }
      if (best && best_score < current_score) {
        std::vector<std::string> committed = current;
        committed[j] = candidates[*best].surface;
        current = committed;
        current_score = best_score;
        Commit(j, std::move(committed), input_.Render(current), best_score);
      }
    }
    return Finish(true);
  }

 private:
  std::vector<Candidate> CandidatesFor(std::size_t j, const SubwordAlignment& alignment,
                                       const MlmTopK& topk) {
    const Span span = alignment.spans.at(j);
    const std::string& word = input_.words().words[j];
    if (span.length() == 0) return {};
    if (span.length() == 1) {
      return SingleWordCandidates(j, word, topk, alignment, gateway_.vocab(), filters_);
    }
    if (!cfg_.use_subword_attack) return {};
    SubwordSearchConfig search = cfg_.subword;
    search.k = cfg_.k;
    try {
      std::vector<Candidate> candidates = SubwordCandidates(
          j, word, topk, alignment, gateway_.vocab(), search, filters_);
      if (cfg_.rescore_subwords) {
        candidates = RescoreSubwordCandidates(std::move(candidates), j, alignment,
                                              gateway_.vocab(), session_);
      }
      return candidates;
    } catch (const SpanTooLong&) {
      return {};
    }
  }

  bool BudgetSpent() const {
    return cfg_.max_target_queries &&
           session_.ledger_snapshot().target_queries >= *cfg_.max_target_queries;
  }

  bool PassesInLoopGate(const std::vector<std::string>& trial) {
    if (!gateway_.has_similarity()) return true;
    const double sim = session_.Similarity(Detokenize(input_.words().words), Detokenize(trial));
    return sim >= cfg_.EffectiveSimThreshold(sample_.pair);
  }

  // `score` is recorded in the descent trace for per-word commits only; a
  // label flip may raise the gold output.
  void Commit(std::size_t j, std::vector<std::string> words, ClassifierInput rendered,
              std::optional<double> score) {
    out_.adversarial.words = std::move(words);
    out_.adversarial_input = std::move(rendered);
    auto& idx = out_.perturbed_indices;
    idx.insert(std::upper_bound(idx.begin(), idx.end(), j), j);
    if (score) out_.gold_score_trace.push_back(*score);
  }

  void Verify() {
    ++out_.verification_queries;
    out_.final_prediction = session_.Classify(out_.adversarial_input).Argmax();
    if (out_.final_prediction == sample_.gold) out_.status = AttackStatus::kFailure;
  }

  AttackOutcome Finish(bool compute_similarity) {
    out_.adversarial.source_text = Detokenize(out_.adversarial.words);
    if (compute_similarity && gateway_.has_similarity()) {
      out_.similarity = session_.Similarity(Detokenize(out_.original.words),
                                            out_.adversarial.source_text);
    }
    out_.sim_gate_passed = cfg_.sim_gate == SimGate::kOff || !out_.similarity ||
                           *out_.similarity >= cfg_.EffectiveSimThreshold(sample_.pair);
    const QueryLedger ledger = session_.ledger_snapshot();
    out_.target_queries = ledger.target_queries;
    out_.mlm_queries = ledger.mlm_queries;
    out_.elapsed = ledger.wall_time;
    return std::move(out_);
  }

  const TextSample& sample_;
  const AttackConfig& cfg_;
  const ModelGateway& gateway_;
  GatewaySession session_;
  SegmentedInput input_;
  FilterConfig filters_;
  AttackOutcome out_;
};

}  // namespace

std::string SimGateName(SimGate gate) {
  switch (gate) {
    case SimGate::kPostHoc: return "post-hoc";
    case SimGate::kInLoop: return "in-loop";
    case SimGate::kOff: return "off";
  }
  return "post-hoc";
}

std::optional<SimGate> ParseSimGate(std::string_view name) {
  if (name == "post-hoc") return SimGate::kPostHoc;
  if (name == "in-loop") return SimGate::kInLoop;
  if (name == "off") return SimGate::kOff;
  return std::nullopt;
}

std::string AttackStatusName(AttackStatus status) {
  switch (status) {
    case AttackStatus::kSuccess: return "success";
    case AttackStatus::kFailure: return "failure";
    case AttackStatus::kSkipped: return "skipped";
  }
  return "failure";
}

std::optional<AttackStatus> ParseAttackStatus(std::string_view name) {
  if (name == "success") return AttackStatus::kSuccess;
  if (name == "failure") return AttackStatus::kFailure;
  if (name == "skipped") return AttackStatus::kSkipped;
  return std::nullopt;
}

void AttackConfig::Validate() const {
  if (k < 0) throw ConfigError("attack.k", "must be >= 0");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ConfigError("attack.epsilon", "must lie in (0, 1]");
  }
  if (sim_threshold && !(*sim_threshold >= -1.0 && *sim_threshold <= 1.0)) {
    throw ConfigError("attack.sim_threshold", "must lie in [-1, 1]");
  }
  if (prob_threshold && !(*prob_threshold <= 0.0)) {
    throw ConfigError("attack.prob_threshold", "log-probability cutoff must be <= 0");
  }
  if (subword.max_span < 1) throw ConfigError("attack.subword.max_span", "must be >= 1");
  if (subword.max_enumeration < std::max(k, 1)) {
    throw ConfigError("attack.subword.max_enumeration", "must be >= k");
  }
  if (max_target_queries && *max_target_queries < 1) {
    throw ConfigError("attack.max_target_queries", "must be >= 1");
  }
}

double AttackConfig::EffectiveSimThreshold(bool pair) const {
  if (sim_threshold) return *sim_threshold;
  return pair ? kDefaultPairSimThreshold : kDefaultSingleSimThreshold;
}

std::uint64_t DeriveSampleSeed(std::uint64_t run_seed, std::string_view sample_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : sample_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(run_seed ^ SplitMix64(h));
}

AttackOutcome Attack(const TextSample& sample, const AttackConfig& cfg,
                     const ModelGateway& gateway) {
  cfg.Validate();
  if (sample.gold < 0 || static_cast<std::size_t>(sample.gold) >= gateway.labels().size()) {
    throw ConfigError("sample.label", "gold label not in the label map");
  }
  return AttackRun(sample, cfg, gateway).Run();
}

double PerturbPercentage(const AttackOutcome& outcome) {
  if (outcome.status == AttackStatus::kSkipped || outcome.original.empty()) return 0.0;
  return 100.0 * static_cast<double>(outcome.perturbed_indices.size()) /
         static_cast<double>(outcome.original.size());
}

}  // namespace mlmattack
