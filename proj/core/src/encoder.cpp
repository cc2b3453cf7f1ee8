// SPDX-License-Identifier: Apache-2.0
#include "apirec/encoder.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace apirec {

namespace {

std::string layer_prefix(int layer) { return "encoder.layer." + std::to_string(layer) + "."; }

template <typename T>
struct LayerParams {
  const BasicTensor<T>* wq;
  const BasicTensor<T>* bq;
  const BasicTensor<T>* wk;
  const BasicTensor<T>* bk;
  const BasicTensor<T>* wv;
  const BasicTensor<T>* bv;
  const BasicTensor<T>* wo;
  const BasicTensor<T>* bo;
  const BasicTensor<T>* g1;
  const BasicTensor<T>* beta1;
  const BasicTensor<T>* w1;
  const BasicTensor<T>* b1;
  const BasicTensor<T>* w2;
  const BasicTensor<T>* b2;
  const BasicTensor<T>* g2;
  const BasicTensor<T>* beta2;
};

template <typename T>
LayerParams<T> layer_params(const ParamSet<T>& p, int layer) {
  const auto pre = layer_prefix(layer);
  auto get = [&](const char* n) { return &require(p, pre + n); };
  return {get("attention.query.weight"), get("attention.query.bias"),
          get("attention.key.weight"),   get("attention.key.bias"),
          get("attention.value.weight"), get("attention.value.bias"),
          get("attention.output.weight"), get("attention.output.bias"),
          get("attention.norm.gamma"),   get("attention.norm.beta"),
          get("ffn.inner.weight"),       get("ffn.inner.bias"),
          get("ffn.outer.weight"),       get("ffn.outer.bias"),
          get("ffn.norm.gamma"),         get("ffn.norm.beta")};
}

/// y = x W^T + b, W stored [out x in].
template <typename T>
Matrix<T> affine(const Matrix<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b) {
  Matrix<T> y = x * w.matrix().transpose();
  y.rowwise() += b.vector().transpose();
  return y;
}

template <typename T>
void affine_backward(const Matrix<T>& x, const Matrix<T>& dy, const BasicTensor<T>& w,
                     BasicTensor<T>& dw, BasicTensor<T>& db, Matrix<T>* dx, bool accumulate_dx) {
  dw.matrix().noalias() += dy.transpose() * x;
  db.vector() += dy.colwise().sum().transpose();
  if (dx != nullptr) {
    if (accumulate_dx) {
      dx->noalias() += dy * w.matrix();
    } else {
      *dx = dy * w.matrix();
    }
  }
}

template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                     Matrix<T>* xhat_out, Vector<T>* rstd_out) {
  const auto n = x.rows();
  const auto f = x.cols();
  Matrix<T> xhat(n, f);
  Vector<T> rstd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const T mean = x.row(i).mean();
    const auto centered = (x.row(i).array() - mean).matrix();
    const T var = centered.squaredNorm() / static_cast<T>(f);
    rstd(i) = T{1} / std::sqrt(var + static_cast<T>(kLayerNormEps));
    xhat.row(i) = centered * rstd(i);
  }
  Matrix<T> y = (xhat.array().rowwise() * gamma.vector().transpose().array()).matrix();
  y.rowwise() += beta.vector().transpose();
  if (xhat_out != nullptr) *xhat_out = std::move(xhat);
  if (rstd_out != nullptr) *rstd_out = std::move(rstd);
  return y;
}

template <typename T>
Matrix<T> layer_norm_backward(const Matrix<T>& dy, const Matrix<T>& xhat, const Vector<T>& rstd,
                              const BasicTensor<T>& gamma, BasicTensor<T>& dgamma,
                              BasicTensor<T>& dbeta) {
  dgamma.vector() += (dy.array() * xhat.array()).colwise().sum().matrix().transpose();
  dbeta.vector() += dy.colwise().sum().transpose();
  Matrix<T> dxhat = (dy.array().rowwise() * gamma.vector().transpose().array()).matrix();
  const auto f = static_cast<T>(dy.cols());
  Matrix<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const T mean_d = dxhat.row(i).sum() / f;
    const T mean_dx = dxhat.row(i).dot(xhat.row(i)) / f;
    dx.row(i) = rstd(i) * (dxhat.row(i).array() - mean_d - xhat.row(i).array() * mean_dx).matrix();
  }
  return dx;
}

template <typename T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
}

template <typename T>
T gelu_grad(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
  const T pdf = std::exp(T(-0.5) * x * x) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  return cdf + x * pdf;
}

/// Scaled inverted-dropout mask; entries are 0 or 1/(1-p).
template <typename T>
Matrix<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, float p, std::mt19937_64& rng) {
  Matrix<T> m(rows, cols);
  const T keep_scale = T(1) / (T(1) - static_cast<T>(p));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    m.data()[i] = u < static_cast<double>(p) ? T(0) : keep_scale;
  }
  return m;
}

/// Row-wise softmax over keys whose mask is 1; masked keys get exactly 0.
template <typename T>
void masked_softmax(Matrix<T>& scores, std::span<const std::int32_t> mask) {
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    T max_v = -std::numeric_limits<T>::infinity();
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (mask[static_cast<std::size_t>(j)] != 0) max_v = std::max(max_v, scores(i, j));
    }
    if (!std::isfinite(max_v)) {
      scores.row(i).setZero();
      continue;
    }
    T sum = 0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (mask[static_cast<std::size_t>(j)] != 0) {
        scores(i, j) = std::exp(scores(i, j) - max_v);
        sum += scores(i, j);
      } else {
        scores(i, j) = 0;
      }
    }
    scores.row(i) /= sum;
  }
}

template <typename T>
Matrix<T> layer_forward(const EncoderConfig& cfg, const LayerParams<T>& lp, const Matrix<T>& x,
                        std::span<const std::int32_t> mask, LayerCache<T>* cache,
                        std::mt19937_64* rng) {
  const int heads = cfg.heads;
  const int dh = cfg.head_dim();
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  const auto n = x.rows();

  Matrix<T> q = affine(x, *lp.wq, *lp.bq);
  Matrix<T> k = affine(x, *lp.wk, *lp.bk);
  Matrix<T> v = affine(x, *lp.wv, *lp.bv);
  Matrix<T> context(n, cfg.hidden);
  std::vector<Matrix<T>> probs(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Matrix<T> s = (q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose()) * scale;
    masked_softmax(s, mask);
    context.middleCols(h * dh, dh).noalias() = s * v.middleCols(h * dh, dh);
    probs[static_cast<std::size_t>(h)] = std::move(s);
  }
  Matrix<T> attn = affine(context, *lp.wo, *lp.bo);
  Matrix<T> attn_drop;
  if (rng != nullptr && cfg.dropout > 0) {
    attn_drop = dropout_mask<T>(n, cfg.hidden, cfg.dropout, *rng);
    attn.array() *= attn_drop.array();
  }
  Matrix<T> xhat1, xhat2;
  Vector<T> rstd1, rstd2;
  Matrix<T> h1 = layer_norm<T>(x + attn, *lp.g1, *lp.beta1, &xhat1, &rstd1);

  Matrix<T> pre = affine(h1, *lp.w1, *lp.b1);
  Matrix<T> act = pre.unaryExpr([](T a) { return gelu(a); });
  Matrix<T> out = affine(act, *lp.w2, *lp.b2);
  Matrix<T> ffn_drop;
  if (rng != nullptr && cfg.dropout > 0) {
    ffn_drop = dropout_mask<T>(n, cfg.hidden, cfg.dropout, *rng);
    out.array() *= ffn_drop.array();
  }
  Matrix<T> h2 = layer_norm<T>(h1 + out, *lp.g2, *lp.beta2, &xhat2, &rstd2);

  if (cache != nullptr) {
    cache->input = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->context = std::move(context);
    cache->attn_drop = std::move(attn_drop);
    cache->xhat1 = std::move(xhat1);
    cache->rstd1 = std::move(rstd1);
    cache->h1 = std::move(h1);
    cache->pre_act = std::move(pre);
    cache->act = std::move(act);
    cache->ffn_drop = std::move(ffn_drop);
    cache->xhat2 = std::move(xhat2);
    cache->rstd2 = std::move(rstd2);
  }
  return h2;
}

template <typename T>
Matrix<T> layer_backward(const EncoderConfig& cfg, const LayerParams<T>& lp,
                         const LayerCache<T>& c, const Matrix<T>& d_out, ParamSet<T>& grads,
                         int layer) {
  const auto pre = layer_prefix(layer);
  auto g = [&](const char* n) -> BasicTensor<T>& { return require(grads, pre + n); };
  const int heads = cfg.heads;
  const int dh = cfg.head_dim();
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  Matrix<T> d_r2 = layer_norm_backward<T>(d_out, c.xhat2, c.rstd2, *lp.g2, g("ffn.norm.gamma"),
                                          g("ffn.norm.beta"));
  Matrix<T> d_h1 = d_r2;
  Matrix<T> d_ffn = d_r2;
  if (c.ffn_drop.size() > 0) d_ffn.array() *= c.ffn_drop.array();
  Matrix<T> d_act;
  affine_backward<T>(c.act, d_ffn, *lp.w2, g("ffn.outer.weight"), g("ffn.outer.bias"), &d_act,
                     false);
  Matrix<T> d_pre = d_act.array() * c.pre_act.unaryExpr([](T a) { return gelu_grad(a); }).array();
  affine_backward<T>(c.h1, d_pre, *lp.w1, g("ffn.inner.weight"), g("ffn.inner.bias"), &d_h1,
                     true);

  Matrix<T> d_r1 = layer_norm_backward<T>(d_h1, c.xhat1, c.rstd1, *lp.g1, g("attention.norm.gamma"),
                                          g("attention.norm.beta"));
  Matrix<T> d_x = d_r1;
  Matrix<T> d_attn = d_r1;
  if (c.attn_drop.size() > 0) d_attn.array() *= c.attn_drop.array();
  Matrix<T> d_ctx;
  affine_backward<T>(c.context, d_attn, *lp.wo, g("attention.output.weight"),
                     g("attention.output.bias"), &d_ctx, false);

  const auto n = c.input.rows();
  Matrix<T> d_q(n, cfg.hidden), d_k(n, cfg.hidden), d_v(n, cfg.hidden);
  for (int h = 0; h < heads; ++h) {
    const auto& p = c.probs[static_cast<std::size_t>(h)];
    const auto dctx_h = d_ctx.middleCols(h * dh, dh);
    Matrix<T> d_p = dctx_h * c.v.middleCols(h * dh, dh).transpose();
    d_v.middleCols(h * dh, dh).noalias() = p.transpose() * dctx_h;
    const Vector<T> row_dot = (p.array() * d_p.array()).rowwise().sum();
    Matrix<T> d_s = (p.array() * (d_p.colwise() - row_dot).array()).matrix();
    d_q.middleCols(h * dh, dh).noalias() = (d_s * c.k.middleCols(h * dh, dh)) * scale;
    d_k.middleCols(h * dh, dh).noalias() = (d_s.transpose() * c.q.middleCols(h * dh, dh)) * scale;
  }
  affine_backward<T>(c.input, d_q, *lp.wq, g("attention.query.weight"), g("attention.query.bias"),
                     &d_x, true);
  affine_backward<T>(c.input, d_k, *lp.wk, g("attention.key.weight"), g("attention.key.bias"),
                     &d_x, true);
  affine_backward<T>(c.input, d_v, *lp.wv, g("attention.value.weight"), g("attention.value.bias"),
                     &d_x, true);
  return d_x;
}

template <typename T>
Matrix<T> embed_rows(const EncoderConfig& cfg, const ParamSet<T>& p,
                     std::span<const TokenId> ids, std::span<const std::int32_t> segments,
                     Matrix<T>* xhat, Vector<T>* rstd) {
  const auto& word = require(p, "encoder.embeddings.word.weight");
  const auto& pos = require(p, "encoder.embeddings.position.weight");
  const auto& seg = require(p, "encoder.embeddings.segment.weight");
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (n > cfg.max_positions) throw ShapeError("sequence longer than the position table");
  Matrix<T> e(n, cfg.hidden);
  const auto wm = word.matrix();
  const auto pm = pos.matrix();
  const auto sm = seg.matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto id = ids[static_cast<std::size_t>(i)];
    const auto s = segments[static_cast<std::size_t>(i)];
    if (id < 0 || id >= cfg.vocab_size) {
      throw ShapeError("token id " + std::to_string(id) + " outside the vocabulary");
    }
    if (s < 0 || s >= cfg.type_vocab) throw ShapeError("segment id out of range");
    e.row(i) = wm.row(id) + pm.row(i) + sm.row(s);
  }
  return layer_norm<T>(e, require(p, "encoder.embeddings.norm.gamma"),
                       require(p, "encoder.embeddings.norm.beta"), xhat, rstd);
}

}  // namespace

void EncoderConfig::validate() const {
  if (layers < 1) throw ConfigError("encoder needs at least one layer");
  if (hidden < 1 || heads < 1 || hidden % heads != 0) {
    throw ConfigError("hidden size must be a positive multiple of the head count");
  }
  if (intermediate < 1 || max_positions < 1 || vocab_size < 1 || type_vocab < 1) {
    throw ConfigError("encoder dimensions must be positive");
  }
  if (dropout < 0 || dropout >= 1) throw ConfigError("dropout must lie in [0, 1)");
}

std::vector<std::pair<std::string, std::vector<std::int64_t>>> encoder_tensor_shapes(
    const EncoderConfig& c) {
  const std::int64_t f = c.hidden;
  const std::int64_t ff = c.intermediate;
  std::vector<std::pair<std::string, std::vector<std::int64_t>>> out{
      {"encoder.embeddings.word.weight", {c.vocab_size, f}},
      {"encoder.embeddings.position.weight", {c.max_positions, f}},
      {"encoder.embeddings.segment.weight", {c.type_vocab, f}},
      {"encoder.embeddings.norm.gamma", {f}},
      {"encoder.embeddings.norm.beta", {f}},
  };
  for (int l = 0; l < c.layers; ++l) {
    const auto pre = layer_prefix(l);
    for (const char* n : {"query", "key", "value", "output"}) {
      out.push_back({pre + "attention." + n + ".weight", {f, f}});
      out.push_back({pre + "attention." + n + ".bias", {f}});
    }
    out.push_back({pre + "attention.norm.gamma", {f}});
    out.push_back({pre + "attention.norm.beta", {f}});
    out.push_back({pre + "ffn.inner.weight", {ff, f}});
    out.push_back({pre + "ffn.inner.bias", {ff}});
    out.push_back({pre + "ffn.outer.weight", {f, ff}});
    out.push_back({pre + "ffn.outer.bias", {f}});
    out.push_back({pre + "ffn.norm.gamma", {f}});
    out.push_back({pre + "ffn.norm.beta", {f}});
  }
  out.push_back({"encoder.pooler.weight", {f, f}});
  out.push_back({"encoder.pooler.bias", {f}});
  return out;
}

float truncated_normal(std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (;;) {
    const double x = dist(rng);
    if (std::abs(x) <= 2 * stddev) return static_cast<float>(x);
  }
}

void init_encoder(const EncoderConfig& config, ParamSet<float>& params, std::mt19937_64& rng) {
  config.validate();
  for (const auto& [name, shape] : encoder_tensor_shapes(config)) {
    Tensor t(shape);
    const bool is_gamma = name.ends_with(".gamma");
    const bool is_weight = name.ends_with(".weight");
    for (auto& x : t.values) {
      x = is_gamma ? 1.0f : is_weight ? truncated_normal(rng, kInitStddev) : 0.0f;
    }
    params.insert_or_assign(name, std::move(t));
  }
}

template <typename T>
Matrix<T> embed(const EncoderConfig& config, const ParamSet<T>& params,
                const TokenizedSequence& seq) {
  return embed_rows<T>(config, params, seq.ids, seq.segment_ids, nullptr, nullptr);
}

template <typename T>
Matrix<T> attention_block(const EncoderConfig& config, const ParamSet<T>& params, int layer,
                          const Matrix<T>& hidden, std::span<const std::int32_t> mask,
                          std::vector<Matrix<T>>* attention) {
  if (static_cast<Eigen::Index>(mask.size()) != hidden.rows() || hidden.cols() != config.hidden) {
    throw ShapeError("attention_block: hidden/mask shape mismatch");
  }
  if (layer < 0 || layer >= config.layers) throw ShapeError("attention_block: no such layer");
  LayerCache<T> cache;
  Matrix<T> out =
      layer_forward<T>(config, layer_params(params, layer), hidden, mask, &cache, nullptr);
  if (attention != nullptr) *attention = std::move(cache.probs);
  return out;
}

template <typename T>
EncoderOutput<T> forward(const EncoderConfig& config, const ParamSet<T>& params,
                         const TokenizedSequence& seq, EncoderCache<T>* cache,
                         std::mt19937_64* dropout_rng) {
  const std::size_t len = seq.ids.size();
  if (seq.segment_ids.size() != len || seq.attention_mask.size() != len) {
    throw ShapeError("sequence fields differ in length");
  }
  if (seq.n_t == 0 || seq.n_t > len) throw ShapeError("sequence has no real tokens");
  for (std::size_t i = 0; i < len; ++i) {
    if (seq.attention_mask[i] != (i < seq.n_t ? 1 : 0)) {
      throw ShapeError("attention mask must be 1 on exactly the first n_t positions");
    }
  }
  if (len > static_cast<std::size_t>(config.max_positions)) {
    throw ShapeError("sequence longer than the position table");
  }
  const auto n = static_cast<Eigen::Index>(seq.n_t);
  const std::span<const TokenId> ids(seq.ids.data(), seq.n_t);
  const std::span<const std::int32_t> segs(seq.segment_ids.data(), seq.n_t);
  const std::span<const std::int32_t> mask(seq.attention_mask.data(), seq.n_t);

  Matrix<T> xhat;
  Vector<T> rstd;
  Matrix<T> x = embed_rows<T>(config, params, ids, segs, &xhat, &rstd);
  Matrix<T> emb_drop;
  if (dropout_rng != nullptr && config.dropout > 0) {
    emb_drop = dropout_mask<T>(n, config.hidden, config.dropout, *dropout_rng);
    x.array() *= emb_drop.array();
  }
  if (cache != nullptr) {
    cache->ids.assign(ids.begin(), ids.end());
    cache->segments.assign(segs.begin(), segs.end());
    cache->emb_xhat = std::move(xhat);
    cache->emb_rstd = std::move(rstd);
    cache->emb_drop = std::move(emb_drop);
    cache->layers.assign(static_cast<std::size_t>(config.layers), LayerCache<T>{});
  }
  for (int l = 0; l < config.layers; ++l) {
    x = layer_forward<T>(config, layer_params(params, l), x, mask,
                         cache ? &cache->layers[static_cast<std::size_t>(l)] : nullptr,
                         dropout_rng);
  }

  const auto& pw = require(params, "encoder.pooler.weight");
  const auto& pb = require(params, "encoder.pooler.bias");
  Vector<T> pooled = (pw.matrix() * x.row(0).transpose() + pb.vector()).array().tanh().matrix();

  EncoderOutput<T> out;
  out.hidden = Matrix<T>::Zero(static_cast<Eigen::Index>(len), config.hidden);
  out.hidden.topRows(n) = x;
  out.pooler = pooled;
  if (cache != nullptr) {
    cache->last = std::move(x);
    cache->pooler = std::move(pooled);
  }
  return out;
}

template <typename T>
void backward(const EncoderConfig& config, const ParamSet<T>& params, const EncoderCache<T>& cache,
              const Matrix<T>& d_hidden, const Vector<T>& d_pooler, ParamSet<T>& grads) {
  const auto n = cache.last.rows();
  if (d_hidden.rows() != n || d_hidden.cols() != config.hidden) {
    throw ShapeError("backward: d_hidden does not match the cached activations");
  }
  Matrix<T> d_x = d_hidden;

  // pooler = tanh(W h0 + b)
  const Vector<T> d_z =
      (d_pooler.array() * (T(1) - cache.pooler.array().square())).matrix();
  require(grads, "encoder.pooler.weight").matrix().noalias() +=
      d_z * cache.last.row(0);
  require(grads, "encoder.pooler.bias").vector() += d_z;
  d_x.row(0).noalias() += (require(params, "encoder.pooler.weight").matrix().transpose() * d_z)
                              .transpose();

  for (int l = config.layers - 1; l >= 0; --l) {
    d_x = layer_backward<T>(config, layer_params(params, l),
                            cache.layers[static_cast<std::size_t>(l)], d_x, grads, l);
  }

  if (cache.emb_drop.size() > 0) d_x.array() *= cache.emb_drop.array();
  Matrix<T> d_e = layer_norm_backward<T>(d_x, cache.emb_xhat, cache.emb_rstd,
                                         require(params, "encoder.embeddings.norm.gamma"),
                                         require(grads, "encoder.embeddings.norm.gamma"),
                                         require(grads, "encoder.embeddings.norm.beta"));
  auto dw = require(grads, "encoder.embeddings.word.weight").matrix();
  auto dp = require(grads, "encoder.embeddings.position.weight").matrix();
  auto ds = require(grads, "encoder.embeddings.segment.weight").matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    dw.row(cache.ids[static_cast<std::size_t>(i)]) += d_e.row(i);
    dp.row(i) += d_e.row(i);
    ds.row(cache.segments[static_cast<std::size_t>(i)]) += d_e.row(i);
  }
}

template <typename T>
Vector<T> mean_pool(const Matrix<T>& hidden, std::span<const std::int32_t> mask) {
  if (static_cast<Eigen::Index>(mask.size()) != hidden.rows()) {
    throw ShapeError("mean_pool: mask length differs from row count");
  }
  Vector<T> sum = Vector<T>::Zero(hidden.cols());
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < hidden.rows(); ++i) {
    if (mask[static_cast<std::size_t>(i)] != 0) {
      sum += hidden.row(i).transpose();
      ++count;
    }
  }
  if (count == 0) throw ShapeError("mean_pool: every position is masked");
  return sum / static_cast<T>(count);
}

#define APIREC_INSTANTIATE(T)                                                                    \
  template Matrix<T> embed<T>(const EncoderConfig&, const ParamSet<T>&,                          \
                              const TokenizedSequence&);                                         \
  template Matrix<T> attention_block<T>(const EncoderConfig&, const ParamSet<T>&, int,           \
                                        const Matrix<T>&, std::span<const std::int32_t>,         \
                                        std::vector<Matrix<T>>*);                                \
  template EncoderOutput<T> forward<T>(const EncoderConfig&, const ParamSet<T>&,                 \
                                       const TokenizedSequence&, EncoderCache<T>*,               \
                                       std::mt19937_64*);                                        \
  template void backward<T>(const EncoderConfig&, const ParamSet<T>&, const EncoderCache<T>&,    \
                            const Matrix<T>&, const Vector<T>&, ParamSet<T>&);                   \
  template Vector<T> mean_pool<T>(const Matrix<T>&, std::span<const std::int32_t>);

APIREC_INSTANTIATE(float)
APIREC_INSTANTIATE(double)

#undef APIREC_INSTANTIATE

}  // namespace apirec
