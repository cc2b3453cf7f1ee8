// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace apirec {

using TokenId = std::int32_t;

/// WordPiece vocabulary. Line number of `vocab.txt` is the token id.
class Vocab {
 public:
  static constexpr std::string_view kCls = "[CLS]";
  static constexpr std::string_view kSep = "[SEP]";
  static constexpr std::string_view kPad = "[PAD]";
  static constexpr std::string_view kUnk = "[UNK]";

  static Vocab load(const std::filesystem::path& path);
  static Vocab from_tokens(std::vector<std::string> tokens, std::string continuation_prefix = "##");

  std::size_t size() const { return tokens_.size(); }
  /// Returns -1 when absent.
  TokenId find(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::string& continuation_prefix() const { return prefix_; }

  TokenId cls() const { return cls_; }
  TokenId sep() const { return sep_; }
  TokenId pad() const { return pad_; }
  TokenId unk() const { return unk_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::string prefix_ = "##";
  TokenId cls_ = -1, sep_ = -1, pad_ = -1, unk_ = -1;
};

/// Model input for a single description or a description pair.
///
/// The attention mask is 1 on exactly the first `n_t` positions.
struct TokenizedSequence {
  std::vector<TokenId> ids;
  std::vector<std::int32_t> segment_ids;
  std::vector<std::int32_t> attention_mask;
  std::size_t n_t = 0;

  std::size_t size() const { return ids.size(); }
  /// Copy without trailing padding.
  TokenizedSequence trimmed() const;
  bool operator==(const TokenizedSequence&) const = default;
};

/// Greedy longest-match-first segmentation of one whitespace-free word.
/// Falls back to a single [UNK] when some suffix cannot be matched.
std::vector<TokenId> wordpiece(std::string_view word, const Vocab& vocab);

/// Whitespace split followed by wordpiece on every word.
std::vector<TokenId> tokenize(std::string_view normalized_text, const Vocab& vocab);

/// [CLS] text [SEP] [PAD]*, head-truncated to max_len - 2 content pieces.
TokenizedSequence encode_single(std::string_view text, const Vocab& vocab, std::size_t max_len);

/// [CLS] a [SEP] b [SEP] [PAD]*. Over budget, one piece at a time is dropped
/// from the end of the currently longer side (ties drop from `b`).
TokenizedSequence encode_pair(std::string_view text_a, std::string_view text_b, const Vocab& vocab,
                              std::size_t max_len);

/// Pair layout from already tokenized pieces; used by encode_pair.
TokenizedSequence frame_pair(std::vector<TokenId> a, std::vector<TokenId> b, const Vocab& vocab,
                             std::size_t max_len);
TokenizedSequence frame_single(std::vector<TokenId> pieces, const Vocab& vocab,
                               std::size_t max_len);

}  // namespace apirec
