// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "apirec/checkpoint.hpp"
#include "apirec/corpus.hpp"
#include "apirec/metrics.hpp"
#include "apirec/model.hpp"

namespace apirec {

struct TrainConfig {
  ModelTask task = ModelTask::FilterApi;
  int epochs = 15;
  int phase_boundary = 6;  // first epoch trained at lr_low; == epochs keeps lr_high throughout
  double lr_high = 1e-3;
  double lr_low = 1e-5;
  std::size_t batch_size = 32;
  int negatives = 5;  // matcher only
  int patience = 3;
  std::size_t selection_n = 5;  // NDCG@n on validation picks the kept epoch
  std::uint64_t seed = 17;

  EncoderConfig encoder;  // vocab_size is taken from the vocabulary
  std::size_t max_len = 128;
  bool use_pooler = true;  // filter heads
  bool use_mean = true;
  MatchMode match_mode = MatchMode::CrossEncode;
  std::size_t validation_h = 45;  // matcher validation candidates, clipped to L
  /// Start the output bias at each label's training log-odds (filters) or at
  /// the sampled positive rate (matcher) instead of zero.
  bool prior_bias = true;

  /// Defaults for a task: 15 epochs with the drop at 6 for filters, 20 and 16
  /// for the matcher.
  static TrainConfig defaults(ModelTask task);
  void validate() const;
};

/// lr_high before the phase boundary, lr_low from it on.
double lr_schedule(int epoch, const TrainConfig& config);

inline constexpr double kBceEpsilon = 1e-7;

/// Mean binary cross-entropy with predictions clamped to [eps, 1 - eps].
double bce_loss(std::span<const double> pred, std::span<const double> target);

/// Canonical Adam with bias correction.
template <typename T>
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamSet<T>& params, const ParamSet<T>& grads, double lr);
  long steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  ParamSet<T> m_, v_;
};

struct PairExample {
  MashupId mashup = 0;  // index into the training span
  ApiId api = 0;
  int label = 0;

  bool operator==(const PairExample&) const = default;
};
using PairBatch = std::vector<PairExample>;

/// One epoch of matcher pairs: every positive once plus `k` negatives per
/// positive drawn uniformly from the mashup's uncalled APIs (without
/// replacement when enough exist, otherwise with replacement and a warning).
/// Pairs are shuffled and cut into batches of `batch_size`.
std::vector<PairBatch> sample_pairs(std::span<const Mashup> train, std::size_t repository_size,
                                    int k, std::size_t batch_size, std::mt19937_64& rng);

/// Mean BCE of one filter example plus, when `grads` is given, accumulated
/// gradients of that loss scaled by `scale`.
template <typename T>
T filter_example_loss(const EncoderConfig& enc, const FusionHeadConfig& head,
                      const ParamSet<T>& params, const TokenizedSequence& seq,
                      std::span<const T> target, ParamSet<T>* grads, T scale = T(1),
                      std::mt19937_64* dropout_rng = nullptr);

/// BCE of one matcher pair. `second` is used only in bi-encode mode.
template <typename T>
T matcher_example_loss(const EncoderConfig& enc, MatchMode mode, const ParamSet<T>& params,
                       const TokenizedSequence& first, const TokenizedSequence& second, T label,
                       ParamSet<T>* grads, T scale = T(1), std::mt19937_64* dropout_rng = nullptr);

struct EpochLog {
  int epoch = 0;
  double lr = 0;
  double train_loss = 0;
  MetricsRow validation;

  bool operator==(const EpochLog&) const = default;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochLog> log;
  int best_epoch = 0;

  /// `epoch lr train_loss val_prec val_rec val_ndcg val_map` per line.
  std::string log_tsv() const;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Multi-hot BCE training of a filter checkpoint (API or category labels).
/// `pretrained` optionally seeds the encoder (see import_bert).
TrainResult train_filter(const SplitCorpus& split, const TextEncoder& text,
                         const TrainConfig& config, const ParamSet<float>* pretrained = nullptr,
                         const EpochCallback& on_epoch = {});

/// Pairwise BCE training of a matcher checkpoint. Validation ranks the
/// filter's top candidates of each validation mashup by matcher score alone.
TrainResult train_matcher(const SplitCorpus& split, const TextEncoder& text,
                          const TrainConfig& config, std::shared_ptr<const Checkpoint> filter,
                          const ParamSet<float>* pretrained = nullptr,
                          const EpochCallback& on_epoch = {});

}  // namespace apirec
