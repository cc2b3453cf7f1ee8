// SPDX-License-Identifier: Apache-2.0
#include "apirec/filter_head.hpp"

#include <algorithm>
#include <numeric>

namespace apirec {

namespace {

constexpr const char* kPoolW = "filter.pooler_proj.weight";
constexpr const char* kPoolB = "filter.pooler_proj.bias";
constexpr const char* kMeanW = "filter.mean_proj.weight";
constexpr const char* kMeanB = "filter.mean_proj.bias";
constexpr const char* kFuseW = "filter.fusion.weight";
constexpr const char* kFuseB = "filter.fusion.bias";

ScoreVector head_scores(const EncoderOutput<float>& enc, std::span<const std::int32_t> mask,
                        const FusionHeadConfig& head, const ParamSet<float>& params,
                        LabelSpace space) {
  head.validate();
  if (static_cast<Eigen::Index>(mask.size()) != enc.hidden.rows()) {
    throw ShapeError("mask length differs from encoder rows");
  }
  const Vector<float> mean = mean_pool<float>(enc.hidden, mask);
  const Vector<float> v = fusion_forward<float>(head, params, enc.pooler, mean);
  ScoreVector out;
  out.space = space;
  out.scores.assign(v.data(), v.data() + v.size());
  return out;
}

}  // namespace

void FusionHeadConfig::validate() const {
  if (labels < 1) throw ConfigError("fusion head needs at least one label");
  if (!use_pooler && !use_mean) throw ConfigError("fusion head needs at least one branch");
}

std::vector<std::pair<std::string, std::vector<std::int64_t>>> fusion_head_shapes(
    const FusionHeadConfig& c, int hidden) {
  const std::int64_t k = c.labels;
  const std::int64_t f = hidden;
  return {{kPoolW, {k, f}}, {kPoolB, {k}},     {kMeanW, {k, f}},
          {kMeanB, {k}},    {kFuseW, {k, 2 * k}}, {kFuseB, {k}}};
}

void init_fusion_head(const FusionHeadConfig& config, int hidden, ParamSet<float>& params,
                      std::mt19937_64& rng) {
  config.validate();
  for (const auto& [name, shape] : fusion_head_shapes(config, hidden)) {
    Tensor t(shape);
    if (name.ends_with(".weight")) {
      for (auto& x : t.values) x = truncated_normal(rng, kInitStddev);
    }
    params.insert_or_assign(name, std::move(t));
  }
}

template <typename T>
Vector<T> fusion_forward(const FusionHeadConfig& config, const ParamSet<T>& params,
                         const Vector<T>& pooler, const Vector<T>& mean,
                         FusionHeadCache<T>* cache) {
  const auto& pw = require(params, kPoolW);
  const auto& mw = require(params, kMeanW);
  const auto& fw = require(params, kFuseW);
  const auto k = static_cast<Eigen::Index>(config.labels);
  if (pw.rows() != k || mw.rows() != k || fw.rows() != k || fw.cols() != 2 * k) {
    throw ShapeError("fusion head tensors do not match the label count");
  }
  if (pw.cols() != pooler.size() || mw.cols() != mean.size()) {
    throw ShapeError("fusion head input width differs from the encoder width");
  }
  const Vector<T> p_in = config.use_pooler ? pooler : Vector<T>::Zero(pooler.size());
  const Vector<T> m_in = config.use_mean ? mean : Vector<T>::Zero(mean.size());

  Vector<T> fused(2 * k);
  fused.head(k).noalias() = pw.matrix() * p_in;
  fused.head(k) += require(params, kPoolB).vector();
  fused.tail(k).noalias() = mw.matrix() * m_in;
  fused.tail(k) += require(params, kMeanB).vector();
  Vector<T> z = fw.matrix() * fused + require(params, kFuseB).vector();
  Vector<T> v = z.unaryExpr([](T x) { return sigmoid(x); });
  if (cache != nullptr) {
    cache->pooler_in = p_in;
    cache->mean_in = m_in;
    cache->fused_in = std::move(fused);
    cache->scores = v;
  }
  return v;
}

template <typename T>
void fusion_backward(const FusionHeadConfig& config, const ParamSet<T>& params,
                     const FusionHeadCache<T>& cache, const Vector<T>& d_logits,
                     ParamSet<T>& grads, Vector<T>& d_pooler, Vector<T>& d_mean) {
  const auto k = static_cast<Eigen::Index>(config.labels);
  require(grads, kFuseW).matrix().noalias() += d_logits * cache.fused_in.transpose();
  require(grads, kFuseB).vector() += d_logits;
  const Vector<T> d_fused = require(params, kFuseW).matrix().transpose() * d_logits;
  const auto d_up = d_fused.head(k);
  const auto d_um = d_fused.tail(k);
  require(grads, kPoolW).matrix().noalias() += d_up * cache.pooler_in.transpose();
  require(grads, kPoolB).vector() += d_up;
  require(grads, kMeanW).matrix().noalias() += d_um * cache.mean_in.transpose();
  require(grads, kMeanB).vector() += d_um;
  d_pooler = config.use_pooler ? Vector<T>(require(params, kPoolW).matrix().transpose() * d_up)
                               : Vector<T>::Zero(cache.pooler_in.size());
  d_mean = config.use_mean ? Vector<T>(require(params, kMeanW).matrix().transpose() * d_um)
                           : Vector<T>::Zero(cache.mean_in.size());
}

template Vector<float> fusion_forward<float>(const FusionHeadConfig&, const ParamSet<float>&,
                                             const Vector<float>&, const Vector<float>&,
                                             FusionHeadCache<float>*);
template Vector<double> fusion_forward<double>(const FusionHeadConfig&, const ParamSet<double>&,
                                               const Vector<double>&, const Vector<double>&,
                                               FusionHeadCache<double>*);
template void fusion_backward<float>(const FusionHeadConfig&, const ParamSet<float>&,
                                     const FusionHeadCache<float>&, const Vector<float>&,
                                     ParamSet<float>&, Vector<float>&, Vector<float>&);
template void fusion_backward<double>(const FusionHeadConfig&, const ParamSet<double>&,
                                      const FusionHeadCache<double>&, const Vector<double>&,
                                      ParamSet<double>&, Vector<double>&, Vector<double>&);

ScoreVector relevance_scores(const EncoderOutput<float>& enc, std::span<const std::int32_t> mask,
                             const FusionHeadConfig& head, const ParamSet<float>& params) {
  return head_scores(enc, mask, head, params, LabelSpace::Repository);
}

ScoreVector category_scores(const EncoderOutput<float>& enc, std::span<const std::int32_t> mask,
                            const FusionHeadConfig& head, const ParamSet<float>& params) {
  return head_scores(enc, mask, head, params, LabelSpace::Categories);
}

std::vector<std::size_t> rank_descending(std::span<const double> scores, std::size_t top) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  top = std::min(top, idx.size());
  auto by_score = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(top), idx.end(),
                    by_score);
  idx.resize(top);
  return idx;
}

CandidateSet select_candidates(const ScoreVector& v_r, std::size_t h) {
  if (v_r.space != LabelSpace::Repository) {
    throw ShapeError("candidates are selected from repository scores");
  }
  if (h > v_r.size()) {
    throw ConfigError("H = " + std::to_string(h) + " exceeds the repository size " +
                      std::to_string(v_r.size()));
  }
  CandidateSet out;
  for (auto i : rank_descending(v_r.scores, h)) {
    out.api_ids.push_back(static_cast<ApiId>(i));
    out.filter_scores.push_back(v_r.scores[i]);
  }
  return out;
}

}  // namespace apirec
