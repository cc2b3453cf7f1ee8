// SPDX-License-Identifier: Apache-2.0
#include "apirec/model.hpp"

#include "apirec/matcher_head.hpp"

namespace apirec {

namespace {

void check_vocab(const CheckpointMeta& meta, const Vocab& vocab) {
  if (static_cast<std::size_t>(meta.encoder.vocab_size) != vocab.size()) {
    throw CompatibilityError("checkpoint was trained with a vocabulary of " +
                             std::to_string(meta.encoder.vocab_size) + " tokens, loaded vocab has " +
                             std::to_string(vocab.size()));
  }
}

}  // namespace

std::vector<TokenId> TextEncoder::pieces(std::string_view raw) const {
  return tokenize(normalizer(raw), *vocab);
}

std::vector<std::vector<TokenId>> tokenize_repository(const Corpus& corpus,
                                                      const TextEncoder& text) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(corpus.apis.size());
  for (const auto& api : corpus.apis) out.push_back(text.pieces(api.description));
  return out;
}

FilterModel::FilterModel(std::shared_ptr<const Checkpoint> checkpoint,
                         std::shared_ptr<const Vocab> vocab)
    : ckpt_(std::move(checkpoint)), vocab_(std::move(vocab)) {
  if (!ckpt_->meta.is_filter()) throw CompatibilityError("checkpoint is not a filter checkpoint");
  check_vocab(ckpt_->meta, *vocab_);
}

LabelSpace FilterModel::label_space() const {
  return meta().task == ModelTask::FilterCategory ? LabelSpace::Categories
                                                  : LabelSpace::Repository;
}

ScoreVector FilterModel::scores(std::string_view normalized_text) const {
  const auto p = tokenize(normalized_text, *vocab_);
  return scores(p);
}

ScoreVector FilterModel::scores(std::span<const TokenId> pieces) const {
  const auto seq =
      frame_single({pieces.begin(), pieces.end()}, *vocab_, meta().max_len).trimmed();
  const auto enc = forward<float>(meta().encoder, ckpt_->tensors, seq);
  if (label_space() == LabelSpace::Categories) {
    return category_scores(enc, seq.attention_mask, meta().filter_head, ckpt_->tensors);
  }
  return relevance_scores(enc, seq.attention_mask, meta().filter_head, ckpt_->tensors);
}

void FilterModel::check_compatible(const Corpus& corpus) const {
  const auto expected = label_space() == LabelSpace::Categories ? corpus.category_count()
                                                                : corpus.repository_size();
  const auto labels = static_cast<std::size_t>(meta().filter_head.labels);
  if (labels != expected) {
    throw CompatibilityError(std::string(to_string(meta().task)) + " checkpoint has " +
                             std::to_string(labels) + " labels, corpus has " +
                             std::to_string(expected));
  }
}

MatcherModel::MatcherModel(std::shared_ptr<const Checkpoint> checkpoint,
                           std::shared_ptr<const Vocab> vocab)
    : ckpt_(std::move(checkpoint)), vocab_(std::move(vocab)) {
  if (ckpt_->meta.task != ModelTask::Matcher) {
    throw CompatibilityError("checkpoint is not a matcher checkpoint");
  }
  check_vocab(ckpt_->meta, *vocab_);
}

double MatcherModel::similarity(std::string_view mashup_text, std::string_view api_text) const {
  const auto a = tokenize(mashup_text, *vocab_);
  const auto b = tokenize(api_text, *vocab_);
  return similarity(a, b);
}

double MatcherModel::similarity(std::span<const TokenId> mashup,
                                std::span<const TokenId> api) const {
  const auto& cfg = meta().encoder;
  const auto& params = ckpt_->tensors;
  std::vector<TokenId> a(mashup.begin(), mashup.end());
  std::vector<TokenId> b(api.begin(), api.end());
  float logit = 0;
  if (meta().match_mode == MatchMode::CrossEncode) {
    const auto seq = frame_pair(std::move(a), std::move(b), *vocab_, meta().max_len).trimmed();
    const auto enc = forward<float>(cfg, params, seq);
    logit = match_logit<float>(MatchMode::CrossEncode, params, enc.pooler, Vector<float>());
  } else {
    const auto sa = frame_single(std::move(a), *vocab_, meta().max_len).trimmed();
    const auto sb = frame_single(std::move(b), *vocab_, meta().max_len).trimmed();
    const auto ea = forward<float>(cfg, params, sa);
    const auto eb = forward<float>(cfg, params, sb);
    logit = match_logit<float>(MatchMode::BiEncodeConcat, params, ea.pooler, eb.pooler);
  }
  return static_cast<double>(sigmoid(logit));
}

ScoreVector MatcherModel::score_candidates(
    std::span<const TokenId> mashup, const CandidateSet& cands,
    const std::vector<std::vector<TokenId>>& api_pieces) const {
  ScoreVector out;
  out.space = LabelSpace::Candidates;
  out.scores.reserve(cands.size());
  for (ApiId id : cands.api_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= api_pieces.size()) {
      throw IntegrityError("candidate api id " + std::to_string(id) + " has no description");
    }
    out.scores.push_back(similarity(mashup, api_pieces[static_cast<std::size_t>(id)]));
  }
  return out;
}

ScoreVector MatcherModel::score_candidates(std::string_view mashup_text,
                                           const CandidateSet& cands, const Corpus& corpus,
                                           const TextNormalizer& normalizer) const {
  const auto m = tokenize(mashup_text, *vocab_);
  std::vector<std::vector<TokenId>> pieces(corpus.apis.size());
  for (ApiId id : cands.api_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= corpus.apis.size()) {
      throw IntegrityError("candidate api id " + std::to_string(id) + " has no description");
    }
    const auto idx = static_cast<std::size_t>(id);
    if (pieces[idx].empty()) pieces[idx] = tokenize(normalizer(corpus.apis[idx].description), *vocab_);
  }
  return score_candidates(m, cands, pieces);
}

}  // namespace apirec
