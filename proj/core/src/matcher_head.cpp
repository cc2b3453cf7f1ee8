// SPDX-License-Identifier: Apache-2.0
#include "apirec/matcher_head.hpp"

namespace apirec {

namespace {

constexpr const char* kTaskW = "matcher.task.weight";
constexpr const char* kTaskB = "matcher.task.bias";
constexpr const char* kPairW = "matcher.task_pair.weight";
constexpr const char* kPairB = "matcher.task_pair.bias";

}  // namespace

std::string_view to_string(MatchMode mode) {
  return mode == MatchMode::CrossEncode ? "cross-encode" : "bi-encode-concat";
}

MatchMode parse_match_mode(std::string_view text) {
  if (text == "cross-encode") return MatchMode::CrossEncode;
  if (text == "bi-encode-concat") return MatchMode::BiEncodeConcat;
  throw ConfigError("unknown match mode '" + std::string(text) + "'");
}

std::vector<std::pair<std::string, std::vector<std::int64_t>>> match_head_shapes(int hidden) {
  const std::int64_t f = hidden;
  return {{kTaskW, {1, f}}, {kTaskB, {1}}, {kPairW, {1, 2 * f}}, {kPairB, {1}}};
}

void init_match_head(int hidden, ParamSet<float>& params, std::mt19937_64& rng) {
  for (const auto& [name, shape] : match_head_shapes(hidden)) {
    Tensor t(shape);
    if (name.ends_with(".weight")) {
      for (auto& x : t.values) x = truncated_normal(rng, kInitStddev);
    }
    params.insert_or_assign(name, std::move(t));
  }
}

template <typename T>
T match_logit(MatchMode mode, const ParamSet<T>& params, const Vector<T>& pooler_a,
              const Vector<T>& pooler_b) {
  if (mode == MatchMode::CrossEncode) {
    const auto& w = require(params, kTaskW);
    if (w.numel() != pooler_a.size()) throw ShapeError("task layer width mismatch");
    return w.vector().dot(pooler_a) + require(params, kTaskB).values[0];
  }
  const auto& w = require(params, kPairW);
  const auto f = pooler_a.size();
  if (w.numel() != 2 * f || pooler_b.size() != f) throw ShapeError("pair task layer width mismatch");
  return w.vector().head(f).dot(pooler_a) + w.vector().tail(f).dot(pooler_b) +
         require(params, kPairB).values[0];
}

template <typename T>
void match_backward(MatchMode mode, const ParamSet<T>& params, const Vector<T>& pooler_a,
                    const Vector<T>& pooler_b, T d_logit, ParamSet<T>& grads, Vector<T>& d_a,
                    Vector<T>& d_b) {
  if (mode == MatchMode::CrossEncode) {
    require(grads, kTaskW).vector() += d_logit * pooler_a;
    require(grads, kTaskB).values[0] += d_logit;
    d_a = d_logit * require(params, kTaskW).vector();
    d_b = Vector<T>::Zero(pooler_b.size());
    return;
  }
  const auto f = pooler_a.size();
  auto gw = require(grads, kPairW).vector();
  gw.head(f) += d_logit * pooler_a;
  gw.tail(f) += d_logit * pooler_b;
  require(grads, kPairB).values[0] += d_logit;
  const auto w = require(params, kPairW).vector();
  d_a = d_logit * w.head(f);
  d_b = d_logit * w.tail(f);
}

template float match_logit<float>(MatchMode, const ParamSet<float>&, const Vector<float>&,
                                  const Vector<float>&);
template double match_logit<double>(MatchMode, const ParamSet<double>&, const Vector<double>&,
                                    const Vector<double>&);
template void match_backward<float>(MatchMode, const ParamSet<float>&, const Vector<float>&,
                                    const Vector<float>&, float, ParamSet<float>&,
                                    Vector<float>&, Vector<float>&);
template void match_backward<double>(MatchMode, const ParamSet<double>&, const Vector<double>&,
                                     const Vector<double>&, double, ParamSet<double>&,
                                     Vector<double>&, Vector<double>&);

}  // namespace apirec
