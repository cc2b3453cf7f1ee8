// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "apirec/checkpoint.hpp"
#include "apirec/corpus.hpp"
#include "apirec/filter_head.hpp"
#include "apirec/tokenizer.hpp"

namespace apirec {

/// Raw text to wordpiece ids: normalization, then tokenization.
struct TextEncoder {
  std::shared_ptr<const Vocab> vocab;
  TextNormalizer normalizer;

  std::vector<TokenId> pieces(std::string_view raw) const;
};

/// Wordpiece ids of every API description, indexed by api id.
std::vector<std::vector<TokenId>> tokenize_repository(const Corpus& corpus,
                                                      const TextEncoder& text);

/// Inference wrapper over a filter checkpoint (API or category labels).
class FilterModel {
 public:
  FilterModel(std::shared_ptr<const Checkpoint> checkpoint, std::shared_ptr<const Vocab> vocab);

  const CheckpointMeta& meta() const { return ckpt_->meta; }
  const Checkpoint& checkpoint() const { return *ckpt_; }
  LabelSpace label_space() const;

  /// Scores over the label space for an already normalized description.
  ScoreVector scores(std::string_view normalized_text) const;
  ScoreVector scores(std::span<const TokenId> pieces) const;

  /// Throws CompatibilityError when the label count differs from `corpus`.
  void check_compatible(const Corpus& corpus) const;

 private:
  std::shared_ptr<const Checkpoint> ckpt_;
  std::shared_ptr<const Vocab> vocab_;
};

/// Inference wrapper over a matcher checkpoint.
class MatcherModel {
 public:
  MatcherModel(std::shared_ptr<const Checkpoint> checkpoint, std::shared_ptr<const Vocab> vocab);

  const CheckpointMeta& meta() const { return ckpt_->meta; }
  const Checkpoint& checkpoint() const { return *ckpt_; }

  /// Pair score in (0,1) for two normalized descriptions. Not symmetric.
  double similarity(std::string_view mashup_text, std::string_view api_text) const;
  double similarity(std::span<const TokenId> mashup, std::span<const TokenId> api) const;

  /// Element j is similarity(mashup, description of cands.api_ids[j]).
  ScoreVector score_candidates(std::span<const TokenId> mashup, const CandidateSet& cands,
                               const std::vector<std::vector<TokenId>>& api_pieces) const;
  ScoreVector score_candidates(std::string_view mashup_text, const CandidateSet& cands,
                               const Corpus& corpus, const TextNormalizer& normalizer) const;

 private:
  std::shared_ptr<const Checkpoint> ckpt_;
  std::shared_ptr<const Vocab> vocab_;
};

}  // namespace apirec
