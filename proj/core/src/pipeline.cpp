// SPDX-License-Identifier: Apache-2.0
#include "apirec/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "apirec/log.hpp"

namespace apirec {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

// Indices of `scores` by descending score, ties by ascending api id.
std::vector<std::size_t> rank_by_id(const std::vector<double>& scores,
                                    const std::vector<ApiId>& ids, std::size_t top) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  top = std::min(top, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(top), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return ids[a] < ids[b];
                    });
  idx.resize(top);
  return idx;
}

// Top-N from candidate-aligned filter and matcher scores.
std::vector<RecommendedApi> assemble(const CandidateSet& cands, const ScoreVector& v_m,
                                     double lambda, std::size_t n) {
  const auto v_r = restrict_to(ScoreVector{cands.filter_scores, LabelSpace::Candidates}, cands);
  const auto v = fuse(v_r, v_m, lambda);
  std::vector<RecommendedApi> out;
  for (auto j : rank_by_id(v.scores, cands.api_ids, n)) {
    out.push_back({cands.api_ids[j], v.scores[j], cands.filter_scores[j], v_m.scores[j]});
  }
  return out;
}

}  // namespace

std::string_view to_string(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::Hierarchical: return "hierarchical";
    case PipelineMode::FilterOnly: return "filter-only";
    case PipelineMode::MatcherOnCandidates: return "matcher-on-candidates";
  }
  return "unknown";
}

PipelineMode parse_pipeline_mode(std::string_view text) {
  if (text == "hierarchical") return PipelineMode::Hierarchical;
  if (text == "filter-only") return PipelineMode::FilterOnly;
  if (text == "matcher-on-candidates") return PipelineMode::MatcherOnCandidates;
  throw ConfigError("unknown mode '" + std::string(text) +
                    "' (expected hierarchical, filter-only or matcher-on-candidates)");
}

void PipelineConfig::validate(std::size_t repository_size) const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  if (top_n < 1) throw ConfigError("N must be at least 1");
  if (mode == PipelineMode::FilterOnly) {
    if (top_n > repository_size) {
      throw ConfigError("N = " + std::to_string(top_n) + " exceeds the repository size " +
                        std::to_string(repository_size));
    }
    return;
  }
  if (top_n > h) {
    throw ConfigError("N = " + std::to_string(top_n) + " exceeds H = " + std::to_string(h));
  }
  if (h > repository_size) {
    throw ConfigError("H = " + std::to_string(h) + " exceeds the repository size " +
                      std::to_string(repository_size));
  }
}

ScoreVector restrict_to(const ScoreVector& v_r, const CandidateSet& cands) {
  if (v_r.space == LabelSpace::Candidates) {
    if (v_r.size() != cands.size()) throw ShapeError("candidate score length mismatch");
    return v_r;
  }
  if (v_r.space != LabelSpace::Repository) throw ShapeError("expected repository scores");
  ScoreVector out;
  out.space = LabelSpace::Candidates;
  for (ApiId id : cands.api_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= v_r.size()) {
      throw ShapeError("candidate id outside the repository");
    }
    out.scores.push_back(v_r.scores[static_cast<std::size_t>(id)]);
  }
  return out;
}

ScoreVector fuse(const ScoreVector& v_r_restricted, const ScoreVector& v_m, double lambda) {
  if (v_r_restricted.size() != v_m.size()) {
    throw ShapeError("cannot fuse score vectors of length " +
                     std::to_string(v_r_restricted.size()) + " and " + std::to_string(v_m.size()));
  }
  if (v_r_restricted.space != LabelSpace::Candidates || v_m.space != LabelSpace::Candidates) {
    throw ShapeError("fusion operates on candidate-aligned scores");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  ScoreVector v;
  v.space = LabelSpace::Candidates;
  v.scores.resize(v_m.size());
  for (std::size_t j = 0; j < v.scores.size(); ++j) {
    v.scores[j] = lambda * v_m.scores[j] + (1.0 - lambda) * v_r_restricted.scores[j];
  }
  return v;
}

Recommender::Recommender(std::shared_ptr<const Corpus> corpus, TextEncoder text,
                         std::shared_ptr<const Checkpoint> filter,
                         std::shared_ptr<const Checkpoint> matcher)
    : corpus_(std::move(corpus)), text_(std::move(text)), filter_(std::move(filter), text_.vocab) {
  if (filter_.meta().task != ModelTask::FilterApi) {
    throw CompatibilityError("the recommender needs a filter-api checkpoint");
  }
  filter_.check_compatible(*corpus_);
  if (matcher) matcher_.emplace(std::move(matcher), text_.vocab);
  api_pieces_ = tokenize_repository(*corpus_, text_);
}

const MatcherModel& Recommender::matcher() const {
  if (!matcher_) throw ConfigError("no matcher checkpoint is loaded");
  return *matcher_;
}

Recommendation Recommender::recommend(std::string_view query, const PipelineConfig& config) const {
  config.validate(corpus_->repository_size());
  Recommendation rec;
  rec.query = std::string(query);
  const auto pieces = text_.pieces(query);
  if (pieces.empty()) throw ConfigError("query is empty after preprocessing");

  const auto t0 = std::chrono::steady_clock::now();
  const auto v_r = filter_.scores(pieces);
  if (config.mode == PipelineMode::FilterOnly) {
    for (auto i : rank_descending(v_r.scores, config.top_n)) {
      rec.items.push_back({static_cast<ApiId>(i), v_r.scores[i], v_r.scores[i], std::nullopt});
    }
    rec.filter_ms = elapsed_ms(t0);
    return rec;
  }
  rec.candidates = select_candidates(v_r, config.h);
  rec.filter_ms = elapsed_ms(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const auto v_m = matcher().score_candidates(pieces, rec.candidates, api_pieces_);
  rec.matcher_ms = elapsed_ms(t1);

  const double lambda = config.mode == PipelineMode::MatcherOnCandidates ? 1.0 : config.lambda;
  rec.items = assemble(rec.candidates, v_m, lambda, config.top_n);
  return rec;
}

MetricsReport evaluate_mashups(const Recommender& rec, std::span<const Mashup> mashups,
                               PipelineConfig config, std::span<const std::size_t> cutoffs) {
  if (mashups.empty()) throw ConfigError("no mashups to evaluate");
  if (cutoffs.empty()) throw ConfigError("no cutoffs to evaluate");
  config.top_n = *std::max_element(cutoffs.begin(), cutoffs.end());
  std::vector<QueryJudgment> judgments;
  judgments.reserve(mashups.size());
  for (const auto& m : mashups) {
    const auto r = rec.recommend(m.description, config);
    QueryJudgment j;
    for (const auto& item : r.items) j.ranked.push_back(item.api_id);
    j.real.assign(m.called_apis.begin(), m.called_apis.end());
    judgments.push_back(std::move(j));
  }
  return evaluate(judgments, cutoffs);
}

std::vector<std::pair<std::string, MetricsReport>> evaluate_modes(
    const Recommender& rec, std::span<const Mashup> mashups, const PipelineConfig& base,
    std::span<const std::size_t> cutoffs) {
  std::vector<std::pair<std::string, MetricsReport>> out;
  for (auto mode : {PipelineMode::FilterOnly, PipelineMode::MatcherOnCandidates,
                    PipelineMode::Hierarchical}) {
    auto config = base;
    config.mode = mode;
    out.emplace_back(std::string(to_string(mode)), evaluate_mashups(rec, mashups, config, cutoffs));
  }
  return out;
}

std::vector<SweepRow> sweep(const Recommender& rec, std::span<const Mashup> mashups,
                            std::span<const std::size_t> hs, std::span<const double> lambdas,
                            std::size_t n) {
  if (mashups.empty()) throw ConfigError("no mashups to sweep over");
  for (double l : lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  }
  const std::size_t repo = rec.corpus().repository_size();
  std::vector<std::size_t> usable;
  for (auto h : hs) {
    if (h > repo) {
      warn("skipping H = " + std::to_string(h) + ": repository holds only " +
           std::to_string(repo) + " APIs");
    } else if (h < n) {
      warn("skipping H = " + std::to_string(h) + ": smaller than N = " + std::to_string(n));
    } else {
      usable.push_back(h);
    }
  }

  std::vector<std::vector<QueryJudgment>> judgments(usable.size() * lambdas.size());
  std::vector<double> matcher_ms(usable.size(), 0.0);
  for (const auto& m : mashups) {
    const auto pieces = rec.text().pieces(m.description);
    if (pieces.empty()) throw ConfigError("mashup '" + m.name + "' is empty after preprocessing");
    const auto v_r = rec.filter().scores(pieces);
    for (std::size_t hi = 0; hi < usable.size(); ++hi) {
      const auto cands = select_candidates(v_r, usable[hi]);
      const auto t = std::chrono::steady_clock::now();
      const auto v_m = rec.matcher().score_candidates(pieces, cands, rec.api_pieces());
      matcher_ms[hi] += elapsed_ms(t);
      for (std::size_t li = 0; li < lambdas.size(); ++li) {
        QueryJudgment j;
        for (const auto& item : assemble(cands, v_m, lambdas[li], n)) j.ranked.push_back(item.api_id);
        j.real.assign(m.called_apis.begin(), m.called_apis.end());
        judgments[hi * lambdas.size() + li].push_back(std::move(j));
      }
    }
  }

  std::vector<SweepRow> rows;
  const std::size_t cutoff[] = {n};
  for (std::size_t hi = 0; hi < usable.size(); ++hi) {
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      SweepRow row;
      row.h = usable[hi];
      row.lambda = lambdas[li];
      row.metrics = evaluate(judgments[hi * lambdas.size() + li], cutoff).rows.front();
      row.matcher_ms = matcher_ms[hi] / static_cast<double>(mashups.size());
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_sweep(const std::vector<SweepRow>& rows, std::size_t n) {
  std::string out = "H\tlambda\tN\tPrec\tRec\tNDCG\tMAP\tmatcher_ms\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu\t%.2f\t%zu\t%.4f\t%.4f\t%.4f\t%.4f\t%.3f\n", r.h, r.lambda,
                  n, r.metrics.precision, r.metrics.recall, r.metrics.ndcg, r.metrics.map,
                  r.matcher_ms);
    out += buf;
  }
  return out;
}

}  // namespace apirec
