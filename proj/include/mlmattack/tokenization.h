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

#ifndef MLMATTACK_TOKENIZATION_H_
#define MLMATTACK_TOKENIZATION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mlmattack {

using TokenId = std::int64_t;

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kUnknownToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kContinuationPrefix = "##";

// Words of a text after segmentation. No word is empty or contains whitespace.
struct WordSequence {
  std::vector<std::string> words;
  std::string source_text;

  std::size_t size() const { return words.size(); }
  bool empty() const { return words.empty(); }
};

// Half-open interval [start, end) into SubwordAlignment::tokens.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct SubwordAlignment {
  std::vector<TokenId> tokens;
  // One span per word, contiguous and sorted.
  std::vector<Span> spans;
  std::string vocab_id;
};

// WordPiece vocabulary: one token per line, line number is the token id.
class Vocabulary {
 public:
  static Vocabulary FromFile(const std::filesystem::path& path, bool cased);
  static Vocabulary FromTokens(std::vector<std::string> tokens, bool cased);

  std::optional<TokenId> Find(std::string_view token) const;
  const std::string& Token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  bool cased() const { return cased_; }

  std::optional<TokenId> mask_id() const { return mask_id_; }
  std::optional<TokenId> unknown_id() const { return unknown_id_; }
  std::optional<TokenId> cls_id() const { return cls_id_; }
  std::optional<TokenId> sep_id() const { return sep_id_; }
  std::optional<TokenId> pad_id() const { return pad_id_; }

  // Throws VocabMissingSpecialToken unless [MASK] and [UNK] are present.
  void RequireMaskAndUnknown() const;

  bool IsSpecial(TokenId id) const;
  bool IsContinuation(TokenId id) const;

  // SHA-256 over the newline-joined token list plus the case flag.
  const std::string& checksum() const { return checksum_; }

 private:
  Vocabulary(std::vector<std::string> tokens, bool cased);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  bool cased_ = false;
  std::optional<TokenId> mask_id_, unknown_id_, cls_id_, sep_id_, pad_id_;
  std::string checksum_;
};

bool IsSpecialTokenString(std::string_view word);
bool IsPunctuationOnly(std::string_view word);

// Splits on ASCII whitespace, then detaches leading and trailing ASCII
// punctuation characters as one-character words. Special-token strings such
// as "[MASK]" are kept whole and never case-folded. Case folding is ASCII only.
WordSequence SplitWords(std::string_view text, bool lowercase);

// Greedy longest-match WordPiece. A word that cannot be fully covered maps to
// a single [UNK].
SubwordAlignment AlignSubwords(const WordSequence& ws, const Vocabulary& vocab);

std::vector<TokenId> TokenizeWord(std::string_view word, const Vocabulary& vocab);

// Reverses WordPiece for the pieces of one word. Returns nullopt when the
// pieces do not form exactly one word (a leading continuation piece, a
// non-continuation piece after the first, or a special token).
std::optional<std::string> JoinSubwords(std::span<const TokenId> pieces,
                                        const Vocabulary& vocab);

// Canonical surface form: words joined with single spaces.
std::string Detokenize(std::span<const std::string> words);

}  // namespace mlmattack

#endif  // MLMATTACK_TOKENIZATION_H_
