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

#ifndef MLMATTACK_CANDIDATES_H_
#define MLMATTACK_CANDIDATES_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "mlmattack/gateway.h"
#include "mlmattack/tokenization.h"

namespace mlmattack {

enum class CandidateOrigin { kSingle, kSubword };

struct Candidate {
  std::string surface;
  // Log-probability for single tokens, negative perplexity for combinations.
  double score = 0.0;
  CandidateOrigin origin = CandidateOrigin::kSingle;
  std::vector<TokenId> tokens;
};

// Unordered word pairs, compared case-insensitively.
class AntonymSet {
 public:
  // One pair per line, two words separated by a tab.
  static AntonymSet FromFile(const std::filesystem::path& path);

  void Add(std::string_view a, std::string_view b);
  bool AreAntonyms(std::string_view a, std::string_view b) const;
  std::size_t size() const { return pairs_.size(); }

 private:
  std::unordered_set<std::string> pairs_;
};

std::unordered_set<std::string> LoadStopwords(const std::filesystem::path& path);

struct FilterConfig {
  std::unordered_set<std::string> stopwords;
  AntonymSet antonyms;
  bool use_antonym_filter = false;
  // Log-probability cutoff; combinations are compared by mean log-probability.
  std::optional<double> prob_threshold;
};

struct SubwordSearchConfig {
  int max_span = 4;
  int max_enumeration = 4096;
  int k = 48;
};

// exp(-mean(log_probs)). Lower is better; 1.0 is certainty.
double CombinationPerplexity(std::span<const double> log_probs);

// Candidates for a word whose span is one token, in descending log-prob order.
std::vector<Candidate> SingleWordCandidates(std::size_t word_index,
                                            std::string_view original_word,
                                            const MlmTopK& topk,
                                            const SubwordAlignment& alignment,
                                            const Vocabulary& vocab,
                                            const FilterConfig& filters);

// Candidates for a multi-piece word: combinations of the per-position top-k
// pieces ranked by ascending perplexity, ties by token ids. Delegates to
// SingleWordCandidates for one-piece spans. Throws SpanTooLong past max_span.
std::vector<Candidate> SubwordCandidates(std::size_t word_index,
                                         std::string_view original_word,
                                         const MlmTopK& topk,
                                         const SubwordAlignment& alignment,
                                         const Vocabulary& vocab,
                                         const SubwordSearchConfig& cfg,
                                         const FilterConfig& filters);

// Re-ranks combination candidates by perplexity under one extra MLM pass per
// candidate, with the candidate's pieces substituted into the sequence.
std::vector<Candidate> RescoreSubwordCandidates(std::vector<Candidate> candidates,
                                                std::size_t word_index,
                                                const SubwordAlignment& alignment,
                                                const Vocabulary& vocab,
                                                GatewaySession& session);

}  // namespace mlmattack

#endif  // MLMATTACK_CANDIDATES_H_
