// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "apirec/tensor.hpp"
#include "apirec/tokenizer.hpp"

namespace apirec {

/// Shape of the transformer encoder. Defaults follow BERT-Tiny.
struct EncoderConfig {
  int layers = 2;
  int hidden = 128;
  int heads = 2;
  int intermediate = 512;
  int max_positions = 256;
  int vocab_size = 0;
  int type_vocab = 2;
  float dropout = 0.1f;  // training only

  int head_dim() const { return hidden / heads; }
  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

inline constexpr double kLayerNormEps = 1e-12;
inline constexpr double kInitStddev = 0.02;

/// Contextual embedding (one row per input position) and pooled summary.
template <typename T>
struct EncoderOutput {
  Matrix<T> hidden;
  Vector<T> pooler;
};

/// Activations kept by forward() for backward().
template <typename T>
struct LayerCache {
  Matrix<T> input;
  Matrix<T> q, k, v;
  std::vector<Matrix<T>> probs;  // per head
  Matrix<T> context;
  Matrix<T> attn_drop;  // empty when dropout is off
  Matrix<T> xhat1;
  Vector<T> rstd1;
  Matrix<T> h1;
  Matrix<T> pre_act;
  Matrix<T> act;
  Matrix<T> ffn_drop;
  Matrix<T> xhat2;
  Vector<T> rstd2;
};

template <typename T>
struct EncoderCache {
  std::vector<TokenId> ids;
  std::vector<std::int32_t> segments;
  Matrix<T> emb_xhat;
  Vector<T> emb_rstd;
  Matrix<T> emb_drop;
  std::vector<LayerCache<T>> layers;
  Matrix<T> last;  // final hidden rows over active positions
  Vector<T> pooler;
};

/// Tensor names and shapes of the encoder, all under the "encoder." prefix.
std::vector<std::pair<std::string, std::vector<std::int64_t>>> encoder_tensor_shapes(
    const EncoderConfig& config);

/// Truncated normal (cut at two standard deviations) weights, zero biases,
/// unit layer-norm gains.
void init_encoder(const EncoderConfig& config, ParamSet<float>& params, std::mt19937_64& rng);

/// Draw from N(0, stddev^2) truncated to +-2 stddev.
float truncated_normal(std::mt19937_64& rng, double stddev);

/// Sum of token, position and segment embeddings, layer-normalized, for every
/// position of `seq` (padding included).
template <typename T>
Matrix<T> embed(const EncoderConfig& config, const ParamSet<T>& params,
                const TokenizedSequence& seq);

/// One transformer layer: masked multi-head self-attention and the GELU
/// feed-forward block, each with residual and post layer-norm. Keys with mask
/// 0 receive zero attention weight. Optionally returns per-head weights.
template <typename T>
Matrix<T> attention_block(const EncoderConfig& config, const ParamSet<T>& params, int layer,
                          const Matrix<T>& hidden, std::span<const std::int32_t> mask,
                          std::vector<Matrix<T>>* attention = nullptr);

/// Full encoder pass. Only the unmasked prefix of `seq` is computed; hidden
/// rows at masked positions are zero, so padding is exactly inert.
/// Passing `dropout_rng` enables dropout (training).
template <typename T>
EncoderOutput<T> forward(const EncoderConfig& config, const ParamSet<T>& params,
                         const TokenizedSequence& seq, EncoderCache<T>* cache = nullptr,
                         std::mt19937_64* dropout_rng = nullptr);

/// Accumulates parameter gradients. `d_hidden` covers the active rows only.
template <typename T>
void backward(const EncoderConfig& config, const ParamSet<T>& params, const EncoderCache<T>& cache,
              const Matrix<T>& d_hidden, const Vector<T>& d_pooler, ParamSet<T>& grads);

/// Mean of the hidden rows where mask is 1.
template <typename T>
Vector<T> mean_pool(const Matrix<T>& hidden, std::span<const std::int32_t> mask);

}  // namespace apirec
