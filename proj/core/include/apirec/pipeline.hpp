// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apirec/corpus.hpp"
#include "apirec/metrics.hpp"
#include "apirec/model.hpp"

namespace apirec {

enum class PipelineMode {
  Hierarchical,         // filter, match the top H, fuse
  FilterOnly,           // filter ranking over the whole repository
  MatcherOnCandidates,  // filter picks H candidates, matcher alone ranks them
};

std::string_view to_string(PipelineMode mode);
PipelineMode parse_pipeline_mode(std::string_view text);

struct PipelineConfig {
  std::size_t h = 45;
  double lambda = 0.6;
  std::size_t top_n = 5;
  PipelineMode mode = PipelineMode::Hierarchical;

  /// Checks 0 <= lambda <= 1 and 1 <= N <= H <= L (N <= L in filter-only mode).
  void validate(std::size_t repository_size) const;
};

struct RecommendedApi {
  ApiId api_id = 0;
  double score = 0;  // fused
  double filter_score = 0;
  std::optional<double> matcher_score;  // absent in filter-only mode

  bool operator==(const RecommendedApi&) const = default;
};

struct Recommendation {
  std::string query;
  std::vector<RecommendedApi> items;
  CandidateSet candidates;  // empty in filter-only mode
  double filter_ms = 0;
  double matcher_ms = 0;
};

/// Filter scores of the candidates, in candidate order.
ScoreVector restrict_to(const ScoreVector& v_r, const CandidateSet& cands);

/// v = lambda * v_m + (1 - lambda) * v_r over aligned candidate vectors.
ScoreVector fuse(const ScoreVector& v_r_restricted, const ScoreVector& v_m, double lambda);

/// The whole recommender over an immutable corpus and model snapshot.
/// Every method is const and safe to call from many threads at once.
/// `matcher` may be null, which leaves only the filter-only mode usable.
class Recommender {
 public:
  Recommender(std::shared_ptr<const Corpus> corpus, TextEncoder text,
              std::shared_ptr<const Checkpoint> filter, std::shared_ptr<const Checkpoint> matcher);

  Recommendation recommend(std::string_view query, const PipelineConfig& config) const;

  const Corpus& corpus() const { return *corpus_; }
  const FilterModel& filter() const { return filter_; }
  bool has_matcher() const { return matcher_.has_value(); }
  const MatcherModel& matcher() const;
  const TextEncoder& text() const { return text_; }
  const std::vector<std::vector<TokenId>>& api_pieces() const { return api_pieces_; }

 private:
  std::shared_ptr<const Corpus> corpus_;
  TextEncoder text_;
  FilterModel filter_;
  std::optional<MatcherModel> matcher_;
  std::vector<std::vector<TokenId>> api_pieces_;
};

/// Runs `mashups` through the recommender at N = max(cutoffs) and scores the
/// ranked lists against their called APIs.
MetricsReport evaluate_mashups(const Recommender& rec, std::span<const Mashup> mashups,
                               PipelineConfig config,
                               std::span<const std::size_t> cutoffs = kDefaultCutoffs);

/// One row per pipeline mode, named after the mode.
std::vector<std::pair<std::string, MetricsReport>> evaluate_modes(
    const Recommender& rec, std::span<const Mashup> mashups, const PipelineConfig& base,
    std::span<const std::size_t> cutoffs = kDefaultCutoffs);

struct SweepRow {
  std::size_t h = 0;
  double lambda = 0;
  MetricsRow metrics;
  double matcher_ms = 0;  // mean matcher-stage time per query at this H
};

/// Hierarchical evaluation over the (H, lambda) grid at cutoff `n`. Cells with
/// H > L or H < n are skipped with a warning.
std::vector<SweepRow> sweep(const Recommender& rec, std::span<const Mashup> mashups,
                            std::span<const std::size_t> hs, std::span<const double> lambdas,
                            std::size_t n);

/// Tab-separated `H lambda N Prec Rec NDCG MAP matcher_ms`.
std::string format_sweep(const std::vector<SweepRow>& rows, std::size_t n);

}  // namespace apirec
