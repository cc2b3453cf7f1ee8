// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "apirec/corpus.hpp"
#include "apirec/encoder.hpp"

namespace apirec {

/// Which label space a score vector ranges over.
enum class LabelSpace { Repository, Candidates, Categories };

struct ScoreVector {
  std::vector<double> scores;
  LabelSpace space = LabelSpace::Repository;

  std::size_t size() const { return scores.size(); }
};

/// Multi-label relevance head over pooled and mean-pooled encoder features.
///
/// Two parallel affine maps (pooler branch, mean branch) project F -> K; their
/// outputs are concatenated and fused by a 2K -> K layer, then squashed with a
/// sigmoid. Disabling a branch feeds zeros into that branch's affine map.
struct FusionHeadConfig {
  std::int64_t labels = 0;  // K
  bool use_pooler = true;
  bool use_mean = true;

  void validate() const;
  bool operator==(const FusionHeadConfig&) const = default;
};

/// Tensor names of the fusion head ("filter." prefix) and their shapes.
std::vector<std::pair<std::string, std::vector<std::int64_t>>> fusion_head_shapes(
    const FusionHeadConfig& config, int hidden);

void init_fusion_head(const FusionHeadConfig& config, int hidden, ParamSet<float>& params,
                      std::mt19937_64& rng);

template <typename T>
struct FusionHeadCache {
  Vector<T> pooler_in;
  Vector<T> mean_in;
  Vector<T> fused_in;  // [U_p; U_m]
  Vector<T> scores;
};

/// Returns sigmoid scores; `cache` keeps the intermediates for backward.
template <typename T>
Vector<T> fusion_forward(const FusionHeadConfig& config, const ParamSet<T>& params,
                         const Vector<T>& pooler, const Vector<T>& mean,
                         FusionHeadCache<T>* cache = nullptr);

/// Backpropagates `d_logits` (gradient w.r.t. the pre-sigmoid fusion output).
template <typename T>
void fusion_backward(const FusionHeadConfig& config, const ParamSet<T>& params,
                     const FusionHeadCache<T>& cache, const Vector<T>& d_logits,
                     ParamSet<T>& grads, Vector<T>& d_pooler, Vector<T>& d_mean);

/// Scores over the API repository from an encoding of a mashup description.
ScoreVector relevance_scores(const EncoderOutput<float>& enc, std::span<const std::int32_t> mask,
                             const FusionHeadConfig& head, const ParamSet<float>& params);

/// Same arithmetic over the category label space.
ScoreVector category_scores(const EncoderOutput<float>& enc, std::span<const std::int32_t> mask,
                            const FusionHeadConfig& head, const ParamSet<float>& params);

/// Top-H repository ids of a relevance score vector.
struct CandidateSet {
  std::vector<ApiId> api_ids;
  std::vector<double> filter_scores;

  std::size_t size() const { return api_ids.size(); }
};

/// The H highest scores in descending order; ties go to the smaller id.
CandidateSet select_candidates(const ScoreVector& v_r, std::size_t h);

/// Indices of `scores` ordered by descending score, ties by ascending index.
std::vector<std::size_t> rank_descending(std::span<const double> scores, std::size_t top);

}  // namespace apirec
