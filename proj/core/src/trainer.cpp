// SPDX-License-Identifier: Apache-2.0
#include "apirec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "apirec/log.hpp"
#include "apirec/matcher_head.hpp"
#include "apirec/pipeline.hpp"

namespace apirec {

namespace {

template <typename T>
T clamp_prob(T p) {
  return std::clamp(p, T(kBceEpsilon), T(1 - kBceEpsilon));
}

template <typename T>
T bce_term(T p, T t) {
  p = clamp_prob(p);
  return -(t * std::log(p) + (T(1) - t) * std::log(T(1) - p));
}

std::uint64_t dropout_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

CheckpointMeta base_meta(const TrainConfig& config, const Corpus& corpus, const Vocab& vocab) {
  CheckpointMeta meta;
  meta.task = config.task;
  meta.encoder = config.encoder;
  meta.encoder.vocab_size = static_cast<int>(vocab.size());
  meta.max_len = config.max_len;
  meta.seed = config.seed;
  meta.repository_size = corpus.repository_size();
  meta.category_count = corpus.category_count();
  meta.match_mode = config.match_mode;
  if (config.task != ModelTask::Matcher) {
    meta.filter_head.labels = static_cast<std::int64_t>(
        config.task == ModelTask::FilterApi ? corpus.repository_size() : corpus.category_count());
    meta.filter_head.use_pooler = config.use_pooler;
    meta.filter_head.use_mean = config.use_mean;
  }
  return meta;
}

void load_pretrained(Checkpoint& ckpt, const ParamSet<float>* pretrained) {
  if (pretrained == nullptr) return;
  for (const auto& [name, shape] : encoder_tensor_shapes(ckpt.meta.encoder)) {
    const auto it = pretrained->find(name);
    if (it == pretrained->end()) throw CompatibilityError("pretrained encoder lacks '" + name + "'");
    if (it->second.shape != shape) {
      throw CompatibilityError("pretrained tensor '" + name + "' does not fit the encoder config");
    }
    ckpt.tensors.at(name) = it->second;
  }
}

// Smoothed log-odds so labels never seen in training stay finite.
float log_odds(double positives, double total) {
  const double p = (positives + 0.5) / (total + 1.0);
  return static_cast<float>(std::log(p / (1.0 - p)));
}

std::vector<TokenId> require_pieces(const TextEncoder& text, const Mashup& m) {
  auto p = text.pieces(m.description);
  if (p.empty()) throw ConfigError("mashup '" + m.name + "' is empty after preprocessing");
  return p;
}

void check_finite(double loss, int epoch, std::size_t step) {
  if (!std::isfinite(loss)) {
    throw TrainingError("loss became non-finite at epoch " + std::to_string(epoch) + ", step " +
                        std::to_string(step) + "; lower the learning rate or check the data");
  }
}

bool improved(const TrainResult& r, const EpochLog& e) {
  return r.log.size() == 1 || e.validation.ndcg > r.best.meta.selection_metric;
}

// Ranks category labels per validation mashup; mashups without categories are skipped.
MetricsRow validate_categories(const Checkpoint& ckpt, const SplitCorpus& split,
                               const TextEncoder& text, std::size_t n) {
  FilterModel model(std::make_shared<Checkpoint>(ckpt), text.vocab);
  std::vector<QueryJudgment> judgments;
  for (const auto& m : split.validation) {
    if (m.categories.empty()) continue;
    const auto v = model.scores(require_pieces(text, m));
    QueryJudgment j;
    for (auto i : rank_descending(v.scores, n)) j.ranked.push_back(static_cast<std::int64_t>(i));
    j.real.assign(m.categories.begin(), m.categories.end());
    judgments.push_back(std::move(j));
  }
  if (judgments.empty()) throw ConfigError("no validation mashup carries a category");
  const std::size_t cutoff[] = {n};
  return evaluate(judgments, cutoff).rows.front();
}

}  // namespace

TrainConfig TrainConfig::defaults(ModelTask task) {
  TrainConfig c;
  c.task = task;
  if (task == ModelTask::Matcher) {
    c.epochs = 20;
    c.phase_boundary = 16;
  }
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (phase_boundary < 0 || phase_boundary > epochs) {
    throw ConfigError("phase boundary must lie in [0, epochs]");
  }
  if (!(lr_high > lr_low && lr_low > 0)) throw ConfigError("need lr_high > lr_low > 0");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (negatives < 1) throw ConfigError("negatives per positive must be at least 1");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (selection_n < 1) throw ConfigError("selection cutoff must be at least 1");
  if (max_len < 5) throw ConfigError("max_len must be at least 5");
  if (max_len > static_cast<std::size_t>(encoder.max_positions)) {
    throw ConfigError("max_len exceeds the encoder position table");
  }
  if (validation_h < selection_n) throw ConfigError("validation H must be at least the cutoff");
}

double lr_schedule(int epoch, const TrainConfig& config) {
  return epoch < config.phase_boundary ? config.lr_high : config.lr_low;
}

double bce_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw ShapeError("bce_loss: " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(target.size()) + " targets");
  }
  if (pred.empty()) throw ShapeError("bce_loss: empty input");
  double sum = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += bce_term(pred[i], target[i]);
  return sum / static_cast<double>(pred.size());
}

template <typename T>
void Adam<T>::step(ParamSet<T>& params, const ParamSet<T>& grads, double lr) {
  if (t_ == 0) {
    m_ = zeros_like(params);
    v_ = zeros_like(params);
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& [name, p] : params) {
    const auto& g = require(grads, name);
    auto& m = m_.at(name);
    auto& v = v_.at(name);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double gi = static_cast<double>(g.values[i]);
      const double mi = beta1_ * static_cast<double>(m.values[i]) + (1.0 - beta1_) * gi;
      const double vi = beta2_ * static_cast<double>(v.values[i]) + (1.0 - beta2_) * gi * gi;
      m.values[i] = static_cast<T>(mi);
      v.values[i] = static_cast<T>(vi);
      const double update = lr * (mi / c1) / (std::sqrt(vi / c2) + eps_);
      p.values[i] = static_cast<T>(static_cast<double>(p.values[i]) - update);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

std::vector<PairBatch> sample_pairs(std::span<const Mashup> train, std::size_t repository_size,
                                    int k, std::size_t batch_size, std::mt19937_64& rng) {
  if (k < 1) throw ConfigError("negatives per positive must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  std::vector<PairExample> pairs;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& m = train[i];
    const std::unordered_set<ApiId> called(m.called_apis.begin(), m.called_apis.end());
    std::vector<ApiId> pool;
    for (std::size_t a = 0; a < repository_size; ++a) {
      if (!called.count(static_cast<ApiId>(a))) pool.push_back(static_cast<ApiId>(a));
    }
    const auto mid = static_cast<MashupId>(i);
    for (ApiId api : m.called_apis) pairs.push_back({mid, api, 1});

    const std::size_t wanted = m.called_apis.size() * static_cast<std::size_t>(k);
    if (pool.empty()) {
      warn("mashup '" + m.name + "' calls every API; no negatives available");
    } else if (pool.size() >= wanted) {
      for (std::size_t d = 0; d < wanted; ++d) {
        std::uniform_int_distribution<std::size_t> pick(d, pool.size() - 1);
        std::swap(pool[d], pool[pick(rng)]);
        pairs.push_back({mid, pool[d], 0});
      }
    } else {
      warn("mashup '" + m.name + "' has only " + std::to_string(pool.size()) +
           " uncalled APIs for " + std::to_string(wanted) + " negatives; sampling with replacement");
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      for (std::size_t d = 0; d < wanted; ++d) pairs.push_back({mid, pool[pick(rng)], 0});
    }
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);

  std::vector<PairBatch> batches;
  for (std::size_t s = 0; s < pairs.size(); s += batch_size) {
    const auto e = std::min(pairs.size(), s + batch_size);
    batches.emplace_back(pairs.begin() + static_cast<std::ptrdiff_t>(s),
                         pairs.begin() + static_cast<std::ptrdiff_t>(e));
  }
  return batches;
}

template <typename T>
T filter_example_loss(const EncoderConfig& enc, const FusionHeadConfig& head,
                      const ParamSet<T>& params, const TokenizedSequence& seq,
                      std::span<const T> target, ParamSet<T>* grads, T scale,
                      std::mt19937_64* dropout_rng) {
  const auto k = static_cast<std::size_t>(head.labels);
  if (target.size() != k) throw ShapeError("target length differs from the label count");
  EncoderCache<T> cache;
  const auto out = forward<T>(enc, params, seq, grads ? &cache : nullptr, dropout_rng);
  const Vector<T> mean = mean_pool<T>(out.hidden, seq.attention_mask);
  FusionHeadCache<T> hc;
  const Vector<T> v = fusion_forward<T>(head, params, out.pooler, mean, &hc);

  T loss = 0;
  for (std::size_t i = 0; i < k; ++i) loss += bce_term(v[static_cast<Eigen::Index>(i)], target[i]);
  loss /= static_cast<T>(k);
  if (grads == nullptr) return loss;

  Vector<T> d_logits(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    d_logits[static_cast<Eigen::Index>(i)] =
        scale * (v[static_cast<Eigen::Index>(i)] - target[i]) / static_cast<T>(k);
  }
  Vector<T> d_pooler, d_mean;
  fusion_backward<T>(head, params, hc, d_logits, *grads, d_pooler, d_mean);
  const auto n = static_cast<Eigen::Index>(seq.n_t);
  Matrix<T> d_hidden = (d_mean / static_cast<T>(n)).transpose().replicate(n, 1);
  backward<T>(enc, params, cache, d_hidden, d_pooler, *grads);
  return loss;
}

template <typename T>
T matcher_example_loss(const EncoderConfig& enc, MatchMode mode, const ParamSet<T>& params,
                       const TokenizedSequence& first, const TokenizedSequence& second, T label,
                       ParamSet<T>* grads, T scale, std::mt19937_64* dropout_rng) {
  EncoderCache<T> ca, cb;
  const bool pair = mode == MatchMode::BiEncodeConcat;
  const auto ea = forward<T>(enc, params, first, grads ? &ca : nullptr, dropout_rng);
  EncoderOutput<T> eb;
  if (pair) eb = forward<T>(enc, params, second, grads ? &cb : nullptr, dropout_rng);
  const T logit = match_logit<T>(mode, params, ea.pooler, eb.pooler);
  const T p = sigmoid(logit);
  const T loss = bce_term(p, label);
  if (grads == nullptr) return loss;

  Vector<T> d_a, d_b;
  match_backward<T>(mode, params, ea.pooler, eb.pooler, scale * (p - label), *grads, d_a, d_b);
  backward<T>(enc, params, ca, Matrix<T>::Zero(ca.last.rows(), enc.hidden), d_a, *grads);
  if (pair) backward<T>(enc, params, cb, Matrix<T>::Zero(cb.last.rows(), enc.hidden), d_b, *grads);
  return loss;
}

#define APIREC_INSTANTIATE(T)                                                                     \
  template T filter_example_loss<T>(const EncoderConfig&, const FusionHeadConfig&,                \
                                    const ParamSet<T>&, const TokenizedSequence&,                 \
                                    std::span<const T>, ParamSet<T>*, T, std::mt19937_64*);       \
  template T matcher_example_loss<T>(const EncoderConfig&, MatchMode, const ParamSet<T>&,         \
                                     const TokenizedSequence&, const TokenizedSequence&, T,       \
                                     ParamSet<T>*, T, std::mt19937_64*);

APIREC_INSTANTIATE(float)
APIREC_INSTANTIATE(double)

#undef APIREC_INSTANTIATE

std::string TrainResult::log_tsv() const {
  std::string out = "epoch\tlr\ttrain_loss\tval_prec\tval_rec\tval_ndcg\tval_map\n";
  char buf[200];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d\t%g\t%.8f\t%.6f\t%.6f\t%.6f\t%.6f\n", e.epoch, e.lr,
                  e.train_loss, e.validation.precision, e.validation.recall, e.validation.ndcg,
                  e.validation.map);
    out += buf;
  }
  return out;
}

TrainResult train_filter(const SplitCorpus& split, const TextEncoder& text,
                         const TrainConfig& config, const ParamSet<float>* pretrained,
                         const EpochCallback& on_epoch) {
  config.validate();
  if (config.task == ModelTask::Matcher) throw ConfigError("train_filter needs a filter task");
  if (split.train.empty()) throw ConfigError("training split is empty");
  if (split.validation.empty()) throw ConfigError("validation split is empty");
  const auto& corpus = *split.corpus;
  const bool categories = config.task == ModelTask::FilterCategory;

  Checkpoint ckpt = init_checkpoint(base_meta(config, corpus, *text.vocab), config.seed);
  load_pretrained(ckpt, pretrained);
  const auto& meta = ckpt.meta;
  const auto k = static_cast<std::size_t>(meta.filter_head.labels);

  std::vector<TokenizedSequence> seqs;
  std::vector<std::vector<float>> targets;
  for (const auto& m : split.train) {
    seqs.push_back(frame_single(require_pieces(text, m), *text.vocab, config.max_len).trimmed());
    std::vector<float> t(k, 0.0f);
    for (auto id : categories ? m.categories : m.called_apis) t[static_cast<std::size_t>(id)] = 1;
    targets.push_back(std::move(t));
  }

  if (config.prior_bias) {
    auto& bias = ckpt.tensors.at("filter.fusion.bias").values;
    for (std::size_t l = 0; l < k; ++l) {
      double pos = 0;
      for (const auto& t : targets) pos += t[l];
      bias[l] = log_odds(pos, static_cast<double>(targets.size()));
    }
  }

  std::mt19937_64 order_rng(config.seed);
  std::mt19937_64 dropout_rng(dropout_seed(config.seed));
  ParamSet<float> grads = zeros_like(ckpt.tensors);
  Adam<float> adam;
  TrainResult result;
  result.best = ckpt;
  int stale = 0;

  std::vector<std::size_t> order(seqs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    std::shuffle(order.begin(), order.end(), order_rng);
    double total = 0;
    std::size_t step = 0;
    for (std::size_t s = 0; s < order.size(); s += config.batch_size, ++step) {
      const auto e = std::min(order.size(), s + config.batch_size);
      const float scale = 1.0f / static_cast<float>(e - s);
      fill_zero(grads);
      for (std::size_t b = s; b < e; ++b) {
        const auto i = order[b];
        const float loss = filter_example_loss<float>(meta.encoder, meta.filter_head, ckpt.tensors,
                                                      seqs[i], targets[i], &grads, scale,
                                                      &dropout_rng);
        check_finite(loss, epoch, step);
        total += loss;
      }
      adam.step(ckpt.tensors, grads, lr);
    }

    EpochLog entry{epoch, lr, total / static_cast<double>(seqs.size()), {}};
    if (categories) {
      entry.validation = validate_categories(ckpt, split, text, config.selection_n);
    } else {
      Recommender rec(split.corpus, text, std::make_shared<Checkpoint>(ckpt), nullptr);
      PipelineConfig pc;
      pc.mode = PipelineMode::FilterOnly;
      const std::size_t cutoff[] = {config.selection_n};
      entry.validation = evaluate_mashups(rec, split.validation, pc, cutoff).rows.front();
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (improved(result, entry)) {
      result.best = ckpt;
      result.best.meta.epochs_trained = epoch + 1;
      result.best.meta.selection_metric = entry.validation.ndcg;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

TrainResult train_matcher(const SplitCorpus& split, const TextEncoder& text,
                          const TrainConfig& config, std::shared_ptr<const Checkpoint> filter,
                          const ParamSet<float>* pretrained, const EpochCallback& on_epoch) {
  config.validate();
  if (config.task != ModelTask::Matcher) throw ConfigError("train_matcher needs the matcher task");
  if (!filter) throw ConfigError("matcher validation needs a filter checkpoint");
  if (split.train.empty()) throw ConfigError("training split is empty");
  if (split.validation.empty()) throw ConfigError("validation split is empty");
  const auto& corpus = *split.corpus;

  Checkpoint ckpt = init_checkpoint(base_meta(config, corpus, *text.vocab), config.seed);
  load_pretrained(ckpt, pretrained);
  const auto& meta = ckpt.meta;

  std::vector<std::vector<TokenId>> mashup_pieces;
  for (const auto& m : split.train) mashup_pieces.push_back(require_pieces(text, m));
  const auto api_pieces = tokenize_repository(corpus, text);

  if (config.prior_bias) {
    // one positive per `negatives` sampled negatives
    const auto bias = static_cast<float>(-std::log(static_cast<double>(config.negatives)));
    for (const char* name : {"matcher.task.bias", "matcher.task_pair.bias"}) {
      if (auto it = ckpt.tensors.find(name); it != ckpt.tensors.end()) it->second.values.assign(1, bias);
    }
  }

  PipelineConfig val;
  val.mode = PipelineMode::MatcherOnCandidates;
  val.h = std::min(config.validation_h, corpus.repository_size());
  const std::size_t cutoff[] = {config.selection_n};
  if (val.h < config.selection_n) throw ConfigError("repository smaller than the selection cutoff");

  std::mt19937_64 order_rng(config.seed);
  std::mt19937_64 dropout_rng(dropout_seed(config.seed));
  ParamSet<float> grads = zeros_like(ckpt.tensors);
  Adam<float> adam;
  TrainResult result;
  result.best = ckpt;
  int stale = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    const auto batches =
        sample_pairs(split.train, corpus.repository_size(), config.negatives, config.batch_size,
                     order_rng);
    double total = 0;
    std::size_t count = 0;
    for (std::size_t step = 0; step < batches.size(); ++step) {
      const auto& batch = batches[step];
      const float scale = 1.0f / static_cast<float>(batch.size());
      fill_zero(grads);
      for (const auto& ex : batch) {
        const auto& mp = mashup_pieces[static_cast<std::size_t>(ex.mashup)];
        const auto& ap = api_pieces[static_cast<std::size_t>(ex.api)];
        TokenizedSequence first, second;
        if (meta.match_mode == MatchMode::CrossEncode) {
          first = frame_pair(mp, ap, *text.vocab, meta.max_len).trimmed();
        } else {
          first = frame_single(mp, *text.vocab, meta.max_len).trimmed();
          second = frame_single(ap, *text.vocab, meta.max_len).trimmed();
        }
        const float loss = matcher_example_loss<float>(
            meta.encoder, meta.match_mode, ckpt.tensors, first, second,
            static_cast<float>(ex.label), &grads, scale, &dropout_rng);
        check_finite(loss, epoch, step);
        total += loss;
        ++count;
      }
      adam.step(ckpt.tensors, grads, lr);
    }

    Recommender rec(split.corpus, text, filter, std::make_shared<Checkpoint>(ckpt));
    EpochLog entry{epoch, lr, count ? total / static_cast<double>(count) : 0.0,
                   evaluate_mashups(rec, split.validation, val, cutoff).rows.front()};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (improved(result, entry)) {
      result.best = ckpt;
      result.best.meta.epochs_trained = epoch + 1;
      result.best.meta.selection_metric = entry.validation.ndcg;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace apirec
