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

#include "mlmattack/candidates.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "mlmattack/errors.h"

namespace mlmattack {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string PairKey(std::string_view a, std::string_view b) {
  std::string x = Lower(a), y = Lower(b);
  if (y < x) std::swap(x, y);
  return x + '\t' + y;
}

bool HasSpace(std::string_view s) {
  return s.find_first_of(" \t\n\r\v\f") != std::string_view::npos;
}

// Shared surface-level filters for both candidate paths.
bool Admissible(std::string_view surface, std::string_view original,
                const FilterConfig& filters) {
  if (surface.empty() || HasSpace(surface)) return false;
  if (IsSpecialTokenString(surface) || IsPunctuationOnly(surface)) return false;
  const std::string lowered = Lower(surface);
  if (lowered == Lower(original)) return false;
  if (filters.stopwords.contains(lowered)) return false;
  if (filters.use_antonym_filter && filters.antonyms.AreAntonyms(surface, original)) {
    return false;
  }
  return true;
}

struct Combination {
  std::vector<TokenId> tokens;
  std::vector<double> log_probs;
  double sum = 0.0;
  double perplexity = 0.0;
};

}  // namespace

AntonymSet AntonymSet::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("antonyms", "cannot open " + path.string());
  AntonymSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ConfigError("antonyms", path.string() + ":" + std::to_string(line_no) +
                                        ": expected two tab-separated words");
    }
    set.Add(std::string_view(line).substr(0, tab), std::string_view(line).substr(tab + 1));
  }
  return set;
}

void AntonymSet::Add(std::string_view a, std::string_view b) { pairs_.insert(PairKey(a, b)); }

bool AntonymSet::AreAntonyms(std::string_view a, std::string_view b) const {
  return pairs_.contains(PairKey(a, b));
}

std::unordered_set<std::string> LoadStopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("stopwords", "cannot open " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.insert(Lower(line));
  }
  return words;
}

double CombinationPerplexity(std::span<const double> log_probs) {
  if (log_probs.empty()) throw Error("perplexity of an empty combination");
  double sum = 0.0;
  for (double lp : log_probs) sum += lp;
  return std::exp(-sum / static_cast<double>(log_probs.size()));
}

std::vector<Candidate> SingleWordCandidates(std::size_t word_index,
                                            std::string_view original_word,
                                            const MlmTopK& topk,
                                            const SubwordAlignment& alignment,
                                            const Vocabulary& vocab,
                                            const FilterConfig& filters) {
  std::vector<Candidate> out;
  if (topk.k <= 0) return out;
  const Span span = alignment.spans.at(word_index);
  if (span.length() != 1) throw Error("single-word path needs a one-piece span");
  const auto& row = topk.rows.at(span.start);
  const std::size_t limit = std::min(row.size(), static_cast<std::size_t>(topk.k));
  for (std::size_t i = 0; i < limit; ++i) {
    const MlmEntry& e = row[i];
    if (filters.prob_threshold && e.log_prob < *filters.prob_threshold) continue;
    if (vocab.IsSpecial(e.token_id) || vocab.IsContinuation(e.token_id)) continue;
    const std::string& surface = vocab.Token(e.token_id);
    if (!Admissible(surface, original_word, filters)) continue;
    out.push_back({surface, e.log_prob, CandidateOrigin::kSingle, {e.token_id}});
  }
  return out;
}

std::vector<Candidate> SubwordCandidates(std::size_t word_index,
                                         std::string_view original_word,
                                         const MlmTopK& topk,
                                         const SubwordAlignment& alignment,
                                         const Vocabulary& vocab,
                                         const SubwordSearchConfig& cfg,
                                         const FilterConfig& filters) {
  const Span span = alignment.spans.at(word_index);
  if (span.length() <= 1) {
    return SingleWordCandidates(word_index, original_word, topk, alignment, vocab, filters);
  }
  if (span.length() > static_cast<std::size_t>(cfg.max_span)) {
    throw SpanTooLong("span of " + std::to_string(span.length()) +
                      " pieces exceeds max_span " + std::to_string(cfg.max_span));
  }
  const std::size_t per_position =
      static_cast<std::size_t>(std::max(0, std::min(cfg.k, topk.k)));
  if (per_position == 0) return {};

  // Beam over prefixes by summed log-prob. Keeping the best max_enumeration
  // prefixes at each step retains the best max_enumeration full combinations.
  const auto better = [](const Combination& a, const Combination& b) {
    if (a.sum != b.sum) return a.sum > b.sum;
    return a.tokens < b.tokens;
  };
  std::vector<Combination> beam(1);
  for (std::size_t pos = span.start; pos < span.end; ++pos) {
    const auto& row = topk.rows.at(pos);
    const std::size_t width = std::min(row.size(), per_position);
    std::vector<Combination> next;
    next.reserve(beam.size() * width);
    for (const Combination& prefix : beam) {
      for (std::size_t i = 0; i < width; ++i) {
        Combination c = prefix;
        c.tokens.push_back(row[i].token_id);
        c.log_probs.push_back(row[i].log_prob);
        c.sum += row[i].log_prob;
        next.push_back(std::move(c));
      }
    }
    const auto cap = static_cast<std::size_t>(std::max(cfg.max_enumeration, 1));
    if (next.size() > cap) {
      std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(cap),
                        next.end(), better);
      next.resize(cap);
    }
    beam = std::move(next);
  }

  for (Combination& c : beam) c.perplexity = CombinationPerplexity(c.log_probs);
  std::sort(beam.begin(), beam.end(), [](const Combination& a, const Combination& b) {
    if (a.perplexity != b.perplexity) return a.perplexity < b.perplexity;
    return a.tokens < b.tokens;
  });

  std::vector<Candidate> out;
  std::unordered_set<std::string> seen;
  const auto t = static_cast<double>(span.length());
  for (const Combination& c : beam) {
    if (out.size() >= per_position) break;
    if (filters.prob_threshold && c.sum / t < *filters.prob_threshold) continue;
    std::optional<std::string> surface = JoinSubwords(c.tokens, vocab);
    if (!surface || !Admissible(*surface, original_word, filters)) continue;
    if (!seen.insert(*surface).second) continue;
    out.push_back({std::move(*surface), -c.perplexity, CandidateOrigin::kSubword, c.tokens});
  }
  return out;
}

std::vector<Candidate> RescoreSubwordCandidates(std::vector<Candidate> candidates,
                                                std::size_t word_index,
                                                const SubwordAlignment& alignment,
                                                const Vocabulary& vocab,
                                                GatewaySession& session) {
  const Span span = alignment.spans.at(word_index);
  const int full = static_cast<int>(vocab.size());
  for (Candidate& c : candidates) {
    if (c.origin != CandidateOrigin::kSubword || c.tokens.size() != span.length()) continue;
    SubwordAlignment substituted = alignment;
    std::copy(c.tokens.begin(), c.tokens.end(),
              substituted.tokens.begin() + static_cast<std::ptrdiff_t>(span.start));
    const MlmTopK scored = session.TopK(substituted, full);
    std::vector<double> log_probs;
    for (std::size_t i = 0; i < c.tokens.size(); ++i) {
      const auto& row = scored.rows.at(span.start + i);
      auto it = std::find_if(row.begin(), row.end(), [&](const MlmEntry& e) {
        return e.token_id == c.tokens[i];
      });
      log_probs.push_back(it == row.end() ? -std::numeric_limits<double>::infinity()
                                          : it->log_prob);
    }
    c.score = -CombinationPerplexity(log_probs);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  return candidates;
}

}  // namespace mlmattack
