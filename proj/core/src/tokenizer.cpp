// SPDX-License-Identifier: Apache-2.0
#include "apirec/tokenizer.hpp"

#include <fstream>
#include <sstream>

#include "apirec/error.hpp"

namespace apirec {

namespace {

constexpr std::size_t kMaxCharsPerWord = 100;

}  // namespace

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vocab " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  // a trailing blank line is an artifact of the final newline
  while (!tokens.empty() && tokens.back().empty()) tokens.pop_back();
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens, std::string continuation_prefix) {
  Vocab v;
  v.prefix_ = std::move(continuation_prefix);
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    // first occurrence wins, later duplicates are unreachable
    v.index_.emplace(v.tokens_[i], static_cast<TokenId>(i));
  }
  v.cls_ = v.find(kCls);
  v.sep_ = v.find(kSep);
  v.pad_ = v.find(kPad);
  v.unk_ = v.find(kUnk);
  if (v.cls_ < 0 || v.sep_ < 0 || v.pad_ < 0 || v.unk_ < 0) {
    throw ConfigError("vocab lacks one of [CLS] [SEP] [PAD] [UNK]");
  }
  return v;
}

TokenId Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? TokenId{-1} : it->second;
}

TokenizedSequence TokenizedSequence::trimmed() const {
  TokenizedSequence out;
  out.n_t = n_t;
  out.ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_t));
  out.segment_ids.assign(segment_ids.begin(), segment_ids.begin() + static_cast<std::ptrdiff_t>(n_t));
  out.attention_mask.assign(attention_mask.begin(),
                            attention_mask.begin() + static_cast<std::ptrdiff_t>(n_t));
  return out;
}

std::vector<TokenId> wordpiece(std::string_view word, const Vocab& vocab) {
  if (word.empty()) return {};
  if (word.size() > kMaxCharsPerWord) return {vocab.unk()};
  std::vector<TokenId> pieces;
  std::size_t start = 0;
  std::string candidate;
  while (start < word.size()) {
    std::size_t end = word.size();
    TokenId match = -1;
    while (start < end) {
      candidate.clear();
      if (start > 0) candidate = vocab.continuation_prefix();
      candidate.append(word.substr(start, end - start));
      match = vocab.find(candidate);
      if (match >= 0) break;
      --end;
    }
    if (match < 0) return {vocab.unk()};
    pieces.push_back(match);
    start = end;
  }
  return pieces;
}

std::vector<TokenId> tokenize(std::string_view normalized_text, const Vocab& vocab) {
  std::vector<TokenId> out;
  std::istringstream is{std::string(normalized_text)};
  std::string word;
  while (is >> word) {
    auto pieces = wordpiece(word, vocab);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

TokenizedSequence frame_single(std::vector<TokenId> pieces, const Vocab& vocab,
                               std::size_t max_len) {
  if (max_len < 3) throw ConfigError("max_len must be at least 3 for a single sequence");
  if (pieces.empty()) throw ConfigError("text is empty after tokenization");
  if (pieces.size() > max_len - 2) pieces.resize(max_len - 2);

  TokenizedSequence seq;
  seq.ids.reserve(max_len);
  seq.ids.push_back(vocab.cls());
  seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.end());
  seq.ids.push_back(vocab.sep());
  seq.n_t = seq.ids.size();
  seq.ids.resize(max_len, vocab.pad());
  seq.segment_ids.assign(max_len, 0);
  seq.attention_mask.assign(max_len, 0);
  std::fill_n(seq.attention_mask.begin(), seq.n_t, 1);
  return seq;
}

TokenizedSequence encode_single(std::string_view text, const Vocab& vocab, std::size_t max_len) {
  return frame_single(tokenize(text, vocab), vocab, max_len);
}

TokenizedSequence frame_pair(std::vector<TokenId> a, std::vector<TokenId> b, const Vocab& vocab,
                             std::size_t max_len) {
  if (max_len < 5) throw ConfigError("max_len must be at least 5 for a pair");
  if (a.empty() || b.empty()) throw ConfigError("pair side is empty after tokenization");
  const std::size_t budget = max_len - 3;
  while (a.size() + b.size() > budget) {
    if (a.size() > b.size()) {
      a.pop_back();
    } else {
      b.pop_back();
    }
  }

  TokenizedSequence seq;
  seq.ids.reserve(max_len);
  seq.ids.push_back(vocab.cls());
  seq.ids.insert(seq.ids.end(), a.begin(), a.end());
  seq.ids.push_back(vocab.sep());
  const std::size_t first_segment = seq.ids.size();
  seq.ids.insert(seq.ids.end(), b.begin(), b.end());
  seq.ids.push_back(vocab.sep());
  seq.n_t = seq.ids.size();
  seq.ids.resize(max_len, vocab.pad());
  seq.segment_ids.assign(max_len, 0);
  std::fill(seq.segment_ids.begin() + static_cast<std::ptrdiff_t>(first_segment),
            seq.segment_ids.begin() + static_cast<std::ptrdiff_t>(seq.n_t), 1);
  seq.attention_mask.assign(max_len, 0);
  std::fill_n(seq.attention_mask.begin(), seq.n_t, 1);
  return seq;
}

TokenizedSequence encode_pair(std::string_view text_a, std::string_view text_b, const Vocab& vocab,
                              std::size_t max_len) {
  return frame_pair(tokenize(text_a, vocab), tokenize(text_b, vocab), vocab, max_len);
}

}  // namespace apirec
