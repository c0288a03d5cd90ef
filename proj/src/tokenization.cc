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

#include "mlmattack/tokenization.h"

#include <algorithm>
#include <fstream>

#include "mlmattack/checksum.h"
#include "mlmattack/errors.h"

namespace mlmattack {
namespace {

constexpr std::size_t kMaxWordBytes = 100;

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Non-ASCII bytes are word characters.
bool IsAsciiPunct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) ||
         (u >= 91 && u <= 96) || (u >= 123 && u <= 126);
}

std::string FoldCase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens, bool cased)
    : tokens_(std::move(tokens)), cased_(cased) {
  index_.reserve(tokens_.size());
  std::string joined;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    // First occurrence wins on duplicate lines.
    index_.emplace(tokens_[i], static_cast<TokenId>(i));
    joined += tokens_[i];
    joined += '\n';
  }
  joined += cased_ ? "cased" : "uncased";
  checksum_ = Sha256Hex(joined);
  mask_id_ = Find(kMaskToken);
  unknown_id_ = Find(kUnknownToken);
  cls_id_ = Find(kClsToken);
  sep_id_ = Find(kSepToken);
  pad_id_ = Find(kPadToken);
}

Vocabulary Vocabulary::FromFile(const std::filesystem::path& path, bool cased) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(std::move(line));
  }
  return Vocabulary(std::move(tokens), cased);
}

Vocabulary Vocabulary::FromTokens(std::vector<std::string> tokens, bool cased) {
  return Vocabulary(std::move(tokens), cased);
}

std::optional<TokenId> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::Token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error("token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::RequireMaskAndUnknown() const {
  if (!mask_id_) throw VocabMissingSpecialToken("vocabulary has no [MASK]");
  if (!unknown_id_) throw VocabMissingSpecialToken("vocabulary has no [UNK]");
}

bool Vocabulary::IsSpecial(TokenId id) const {
  return IsSpecialTokenString(Token(id));
}

bool Vocabulary::IsContinuation(TokenId id) const {
  const std::string& token = Token(id);
  return token.size() > kContinuationPrefix.size() &&
         token.starts_with(kContinuationPrefix);
}

bool IsSpecialTokenString(std::string_view word) {
  return word == kMaskToken || word == kUnknownToken || word == kClsToken ||
         word == kSepToken || word == kPadToken;
}

bool IsPunctuationOnly(std::string_view word) {
  return !word.empty() && std::all_of(word.begin(), word.end(), IsAsciiPunct);
}

WordSequence SplitWords(std::string_view text, bool lowercase) {
  WordSequence ws;
  ws.source_text = std::string(text);
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && IsAsciiSpace(text[pos])) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !IsAsciiSpace(text[end])) ++end;
    std::string_view chunk = text.substr(pos, end - pos);
    pos = end;
    if (chunk.empty()) continue;
    if (IsSpecialTokenString(chunk)) {
      ws.words.emplace_back(chunk);
      continue;
    }
    if (chunk.front() == '[') {
      std::size_t close = chunk.find(']');
      if (close != std::string_view::npos &&
          IsSpecialTokenString(chunk.substr(0, close + 1))) {
        std::string_view rest = chunk.substr(close + 1);
        bool all_punct = true;
        for (char c : rest) all_punct = all_punct && IsAsciiPunct(c);
        if (all_punct) {
          ws.words.emplace_back(chunk.substr(0, close + 1));
          for (char c : rest) ws.words.emplace_back(1, c);
          continue;
        }
      }
    }
    std::size_t lead = 0;
    while (lead < chunk.size() && IsAsciiPunct(chunk[lead])) ++lead;
    std::size_t trail = chunk.size();
    while (trail > lead && IsAsciiPunct(chunk[trail - 1])) --trail;
    for (std::size_t i = 0; i < lead; ++i) ws.words.emplace_back(1, chunk[i]);
    if (trail > lead) {
      std::string_view core = chunk.substr(lead, trail - lead);
      ws.words.push_back(lowercase ? FoldCase(core) : std::string(core));
    }
    for (std::size_t i = trail; i < chunk.size(); ++i) {
      ws.words.emplace_back(1, chunk[i]);
    }
  }
  return ws;
}

std::vector<TokenId> TokenizeWord(std::string_view word, const Vocabulary& vocab) {
  const TokenId unknown = *vocab.unknown_id();
  if (IsSpecialTokenString(word)) {
    if (auto id = vocab.Find(word)) return {*id};
    return {unknown};
  }
  const std::string folded = vocab.cased() ? std::string(word) : FoldCase(word);
  if (folded.size() > kMaxWordBytes) return {unknown};

  std::vector<TokenId> pieces;
  std::size_t start = 0;
  std::string candidate;
  while (start < folded.size()) {
    std::optional<TokenId> match;
    std::size_t end = folded.size();
    for (; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate += kContinuationPrefix;
      candidate.append(folded, start, end - start);
      if ((match = vocab.Find(candidate))) break;
    }
    if (!match) return {unknown};
    pieces.push_back(*match);
    start = end;
  }
  return pieces;
}

SubwordAlignment AlignSubwords(const WordSequence& ws, const Vocabulary& vocab) {
  vocab.RequireMaskAndUnknown();
  SubwordAlignment alignment;
  alignment.vocab_id = vocab.checksum();
  alignment.spans.reserve(ws.size());
  for (const std::string& word : ws.words) {
    const std::size_t start = alignment.tokens.size();
    for (TokenId id : TokenizeWord(word, vocab)) alignment.tokens.push_back(id);
    alignment.spans.push_back({start, alignment.tokens.size()});
  }
  return alignment;
}

std::optional<std::string> JoinSubwords(std::span<const TokenId> pieces,
                                        const Vocabulary& vocab) {
  if (pieces.empty()) return std::nullopt;
  std::string word;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (vocab.IsSpecial(pieces[i])) return std::nullopt;
    const bool continuation = vocab.IsContinuation(pieces[i]);
    if ((i == 0) == continuation) return std::nullopt;
    const std::string& token = vocab.Token(pieces[i]);
    word += continuation ? token.substr(kContinuationPrefix.size()) : token;
  }
  if (word.empty()) return std::nullopt;
  return word;
}

std::string Detokenize(std::span<const std::string> words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace mlmattack
