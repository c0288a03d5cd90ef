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

#include "mlmattack/evaluation.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "mlmattack/errors.h"
#include "mlmattack/records.h"

namespace mlmattack {
namespace {

using nlohmann::json;

json Optional(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> Ratio(double numerator, std::size_t denominator) {
  if (denominator == 0) return std::nullopt;
  return numerator / static_cast<double>(denominator);
}

std::string FormatThreshold(const std::optional<double>& t) {
  if (!t) return "none";
  std::ostringstream os;
  os << *t;
  return os.str();
}

}  // namespace

bool CountsAsSuccess(const AttackOutcome& outcome) {
  return outcome.status == AttackStatus::kSuccess && outcome.sim_gate_passed;
}

EvaluationReport Summarize(std::span<const SampleResult> results, const AttackConfig& cfg) {
  EvaluationReport r;
  r.n_samples = results.size();
  double perturb_sum = 0.0, query_sum = 0.0, sim_sum = 0.0, runtime_sum = 0.0;
  std::size_t sim_count = 0;
  for (const SampleResult& s : results) {
    const AttackOutcome& o = s.outcome;
    runtime_sum += o.elapsed;
    if (o.budget_exceeded) ++r.budget_exceeded;
    if (o.status == AttackStatus::kSkipped) {
      ++r.skipped_count;
      continue;
    }
    ++r.original_correct;
    query_sum += static_cast<double>(o.target_queries);
    if (o.status == AttackStatus::kSuccess && !o.sim_gate_passed) ++r.gate_rejected;
    if (!CountsAsSuccess(o)) continue;
    ++r.successes;
    perturb_sum += PerturbPercentage(o);
    if (o.similarity) {
      sim_sum += *o.similarity;
      ++sim_count;
    }
  }
  r.original_accuracy = Ratio(static_cast<double>(r.original_correct), r.n_samples);
  r.attacked_accuracy =
      Ratio(static_cast<double>(r.original_correct - r.successes), r.n_samples);
  r.success_rate = Ratio(static_cast<double>(r.successes), r.original_correct);
  r.avg_perturb_pct = Ratio(perturb_sum, r.successes);
  r.avg_target_queries = Ratio(query_sum, r.original_correct);
  r.avg_similarity = Ratio(sim_sum, sim_count);
  r.avg_runtime_s = Ratio(runtime_sum, r.n_samples);
  r.config_echo = AttackConfigToJson(cfg);
  return r;
}

EvaluationResult Evaluate(std::span<const TextSample> corpus, const AttackConfig& cfg,
                          const ModelGateway& gateway, const EvaluateOptions& options) {
  cfg.Validate();
  std::vector<std::optional<AttackOutcome>> outcomes(corpus.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      if (options.cancel && options.cancel->load()) return;
      {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (failure) return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= corpus.size()) return;
      try {
        outcomes[i] = Attack(corpus[i], cfg, gateway);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EvaluationResult result;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (outcomes[i]) result.samples.push_back({corpus[i], std::move(*outcomes[i])});
  }
  result.report = Summarize(result.samples, cfg);
  return result;
}

json AttackConfigToJson(const AttackConfig& cfg) {
  json j;
  j["k"] = cfg.k;
  j["epsilon"] = cfg.epsilon;
  j["ranking"] = RankingModeName(cfg.ranking_mode);
  j["sim_threshold"] = Optional(cfg.sim_threshold);
  j["sim_gate"] = SimGateName(cfg.sim_gate);
  j["prob_threshold"] = Optional(cfg.prob_threshold);
  j["use_subword_attack"] = cfg.use_subword_attack;
  j["rescore_subwords"] = cfg.rescore_subwords;
  j["max_span"] = cfg.subword.max_span;
  j["max_enumeration"] = cfg.subword.max_enumeration;
  j["seed"] = cfg.seed;
  j["max_target_queries"] =
      cfg.max_target_queries ? json(*cfg.max_target_queries) : json(nullptr);
  j["verify_success"] = cfg.verify_success;
  j["antonym_filter"] = cfg.lexicon && cfg.lexicon->use_antonym_filter;
  return j;
}

json ReportToJson(const EvaluationReport& r) {
  json j;
  j["n_samples"] = r.n_samples;
  j["original_correct"] = r.original_correct;
  j["successes"] = r.successes;
  j["skipped_count"] = r.skipped_count;
  j["gate_rejected"] = r.gate_rejected;
  j["budget_exceeded"] = r.budget_exceeded;
  j["original_accuracy"] = Optional(r.original_accuracy);
  j["attacked_accuracy"] = Optional(r.attacked_accuracy);
  j["success_rate"] = Optional(r.success_rate);
  j["avg_perturb_pct"] = Optional(r.avg_perturb_pct);
  j["avg_target_queries"] = Optional(r.avg_target_queries);
  j["avg_similarity"] = Optional(r.avg_similarity);
  j["populations"] = {
      {"avg_perturb_pct", "successful attacks"},
      {"avg_similarity", "successful attacks with a similarity score"},
      {"avg_target_queries", "non-skipped samples"},
      {"avg_runtime_s", "all samples (timing.json)"},
  };
  j["config"] = r.config_echo;
  return j;
}

json TimingToJson(const EvaluationResult& result) {
  json per_sample = json::array();
  for (const SampleResult& s : result.samples) {
    per_sample.push_back({{"id", s.sample.id}, {"elapsed_s", s.outcome.elapsed}});
  }
  return {{"avg_runtime_s", Optional(result.report.avg_runtime_s)}, {"samples", per_sample}};
}

std::vector<TextSample> SelectSubset(std::span<const TextSample> corpus,
                                     std::size_t max_samples, std::uint64_t seed) {
  if (corpus.size() <= max_samples) return {corpus.begin(), corpus.end()};
  std::vector<std::size_t> idx(corpus.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(max_samples);
  std::sort(idx.begin(), idx.end());
  std::vector<TextSample> out;
  out.reserve(max_samples);
  for (std::size_t i : idx) out.push_back(corpus[i]);
  return out;
}

std::optional<AblationDimension> ParseAblationDimension(std::string_view name) {
  if (name == "k-sweep") return AblationDimension::kKSweep;
  if (name == "ranking-modes") return AblationDimension::kRankingModes;
  if (name == "subword-toggle") return AblationDimension::kSubwordToggle;
  if (name == "prob-threshold") return AblationDimension::kProbThreshold;
  return std::nullopt;
}

std::string AblationDimensionName(AblationDimension dimension) {
  switch (dimension) {
    case AblationDimension::kKSweep: return "k-sweep";
    case AblationDimension::kRankingModes: return "ranking-modes";
    case AblationDimension::kSubwordToggle: return "subword-toggle";
    case AblationDimension::kProbThreshold: return "prob-threshold";
  }
  return "k-sweep";
}

std::vector<AblationVariant> AblationVariants(const AttackConfig& base,
                                              AblationDimension dimension,
                                              const AblationOptions& options) {
  std::vector<AblationVariant> variants;
  switch (dimension) {
    case AblationDimension::kKSweep:
      for (int k : options.k_values) {
        AttackConfig cfg = base;
        cfg.k = k;
        cfg.subword.max_enumeration = std::max(cfg.subword.max_enumeration, k);
        variants.push_back({"k" + std::to_string(k), cfg});
      }
      break;
    case AblationDimension::kRankingModes:
      for (RankingMode mode : {RankingMode::kMir, RankingMode::kLir, RankingMode::kRandom}) {
        AttackConfig cfg = base;
        cfg.ranking_mode = mode;
        variants.push_back({RankingModeName(mode), cfg});
      }
      break;
    case AblationDimension::kSubwordToggle:
      for (bool on : {true, false}) {
        AttackConfig cfg = base;
        cfg.use_subword_attack = on;
        variants.push_back({on ? "subword-on" : "subword-off", cfg});
      }
      break;
    case AblationDimension::kProbThreshold:
      for (const auto& t : options.prob_thresholds) {
        AttackConfig cfg = base;
        cfg.prob_threshold = t;
        variants.push_back({"threshold-" + FormatThreshold(t), cfg});
      }
      break;
  }
  return variants;
}

std::vector<AblationRow> Ablate(std::span<const TextSample> corpus, const AttackConfig& base,
                                AblationDimension dimension, const ModelGateway& gateway,
                                const AblationOptions& ablation,
                                const EvaluateOptions& options) {
  std::vector<AblationRow> rows;
  for (AblationVariant& v : AblationVariants(base, dimension, ablation)) {
    rows.push_back({v.name, Evaluate(corpus, v.cfg, gateway, options)});
  }
  return rows;
}

TransferReport TransferEvaluate(std::span<const AdversarialRecord> records,
                                const LabelMap& source_labels, const ModelGateway& target) {
  if (!(source_labels == target.labels())) {
    throw LabelMapMismatch("source and target label maps differ");
  }
  TransferReport report;
  GatewaySession session = target.OpenSession();
  for (const AdversarialRecord& r : records) {
    if (r.status != AttackStatus::kSuccess || !r.sim_gate_passed) continue;
    ++report.n_records;
    if (session.Classify(r.adversarial_input).Argmax() == r.gold) ++report.correct;
  }
  report.accuracy = Ratio(static_cast<double>(report.correct), report.n_records);
  return report;
}

json TransferToJson(const TransferReport& report) {
  return {{"n_records", report.n_records},
          {"correct", report.correct},
          {"attacked_accuracy", Optional(report.accuracy)}};
}

std::vector<TextSample> BuildAdversarialTrainingSet(std::span<const SampleResult> results) {
  std::vector<TextSample> out;
  for (const SampleResult& s : results) out.push_back(s.sample);
  for (const SampleResult& s : results) {
    if (!CountsAsSuccess(s.outcome)) continue;
    const ClassifierInput& adv = s.outcome.adversarial_input;
    if (s.sample.pair) {
      out.push_back(TextSample::Pair(s.sample.id + "-adv", adv.text, *adv.hypothesis,
                                     s.sample.attack_side, s.sample.gold));
    } else {
      out.push_back(TextSample::Single(s.sample.id + "-adv", adv.text, s.sample.gold));
    }
  }
  return out;
}

std::vector<TextSample> ExportAdversarialTrainingSet(std::span<const TextSample> train_corpus,
                                                     const AttackConfig& cfg,
                                                     const ModelGateway& gateway,
                                                     const std::filesystem::path& out_path,
                                                     const EvaluateOptions& options) {
  const EvaluationResult result = Evaluate(train_corpus, cfg, gateway, options);
  std::vector<TextSample> augmented = BuildAdversarialTrainingSet(result.samples);
  WriteCorpus(out_path, augmented, gateway.labels());
  return augmented;
}

}  // namespace mlmattack
