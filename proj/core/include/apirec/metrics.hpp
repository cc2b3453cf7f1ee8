// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace apirec {

/// One query's ranked output against the ids it should have returned.
struct QueryJudgment {
  std::vector<std::int64_t> ranked;  // distinct
  std::vector<std::int64_t> real;    // non-empty, distinct

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// Upper limit of the ideal DCG sum. Capped uses min(|real|, N), which makes
/// NDCG@1 equal Precision@1; Uncapped sums over all |real| positions.
enum class IdcgBound { Capped, Uncapped };

double precision_at(const QueryJudgment& j, std::size_t n);
double recall_at(const QueryJudgment& j, std::size_t n);
double ndcg_at(const QueryJudgment& j, std::size_t n, IdcgBound bound = IdcgBound::Capped);
/// Zero when the top n holds no hit.
double ap_at(const QueryJudgment& j, std::size_t n);

struct MetricsRow {
  std::size_t n = 0;
  double precision = 0;
  double recall = 0;
  double ndcg = 0;
  double map = 0;

  bool operator==(const MetricsRow&) const = default;
};

/// Per-N means over all queries.
struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::size_t queries = 0;

  /// Throws ConfigError when `n` was not evaluated.
  const MetricsRow& at(std::size_t n) const;
  bool operator==(const MetricsReport&) const = default;
};

inline constexpr std::size_t kDefaultCutoffs[] = {1, 5, 10};

MetricsReport evaluate(std::span<const QueryJudgment> judgments,
                       std::span<const std::size_t> cutoffs = kDefaultCutoffs,
                       IdcgBound bound = IdcgBound::Capped);

/// Tab-separated table: one row per named report, columns
/// `model Prec@N Rec@N NDCG@N MAP@N` repeated for every N of the first report.
std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace apirec
