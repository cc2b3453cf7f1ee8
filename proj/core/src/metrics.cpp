// SPDX-License-Identifier: Apache-2.0
#include "apirec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "apirec/error.hpp"

namespace apirec {

namespace {

// rel_i for i = 1..min(n, |ranked|).
std::vector<int> relevance(const QueryJudgment& j, std::size_t n) {
  const std::unordered_set<std::int64_t> real(j.real.begin(), j.real.end());
  const std::size_t top = std::min(n, j.ranked.size());
  std::vector<int> rel(top);
  for (std::size_t i = 0; i < top; ++i) rel[i] = real.count(j.ranked[i]) ? 1 : 0;
  return rel;
}

std::size_t hits(const QueryJudgment& j, std::size_t n) {
  const auto rel = relevance(j, n);
  return static_cast<std::size_t>(std::count(rel.begin(), rel.end(), 1));
}

void require_cutoff(std::size_t n) {
  if (n < 1) throw ConfigError("cutoff N must be at least 1");
}

}  // namespace

void QueryJudgment::validate() const {
  if (real.empty()) throw ConfigError("judgment has no relevant ids");
  if (std::unordered_set<std::int64_t>(ranked.begin(), ranked.end()).size() != ranked.size()) {
    throw ConfigError("ranked ids are not distinct");
  }
  if (std::unordered_set<std::int64_t>(real.begin(), real.end()).size() != real.size()) {
    throw ConfigError("relevant ids are not distinct");
  }
}

double precision_at(const QueryJudgment& j, std::size_t n) {
  require_cutoff(n);
  return static_cast<double>(hits(j, n)) / static_cast<double>(n);
}

double recall_at(const QueryJudgment& j, std::size_t n) {
  require_cutoff(n);
  return static_cast<double>(hits(j, n)) / static_cast<double>(j.real.size());
}

double ndcg_at(const QueryJudgment& j, std::size_t n, IdcgBound bound) {
  require_cutoff(n);
  const auto rel = relevance(j, n);
  double dcg = 0;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (rel[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  const std::size_t ideal = bound == IdcgBound::Capped ? std::min(j.real.size(), n) : j.real.size();
  double idcg = 0;
  for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

double ap_at(const QueryJudgment& j, std::size_t n) {
  require_cutoff(n);
  const auto rel = relevance(j, n);
  double sum = 0;
  std::size_t found = 0;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (!rel[i]) continue;
    ++found;
    sum += static_cast<double>(found) / static_cast<double>(i + 1);
  }
  return found == 0 ? 0.0 : sum / static_cast<double>(found);
}

const MetricsRow& MetricsReport::at(std::size_t n) const {
  for (const auto& r : rows) {
    if (r.n == n) return r;
  }
  throw ConfigError("metrics were not computed at N = " + std::to_string(n));
}

MetricsReport evaluate(std::span<const QueryJudgment> judgments,
                       std::span<const std::size_t> cutoffs, IdcgBound bound) {
  if (judgments.empty()) throw ConfigError("cannot evaluate an empty set of queries");
  for (const auto& j : judgments) j.validate();
  MetricsReport report;
  report.queries = judgments.size();
  const auto q = static_cast<double>(judgments.size());
  for (std::size_t n : cutoffs) {
    MetricsRow row;
    row.n = n;
    for (const auto& j : judgments) {
      row.precision += precision_at(j, n);
      row.recall += recall_at(j, n);
      row.ndcg += ndcg_at(j, n, bound);
      row.map += ap_at(j, n);
    }
    row.precision /= q;
    row.recall /= q;
    row.ndcg /= q;
    row.map /= q;
    report.rows.push_back(row);
  }
  return report;
}

std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& reports) {
  std::string out = "model";
  if (reports.empty()) return out + "\n";
  for (const auto& r : reports.front().second.rows) {
    for (const char* m : {"Prec", "Rec", "NDCG", "MAP"}) out += "\t" + std::string(m) + "@" + std::to_string(r.n);
  }
  out += "\n";
  char buf[32];
  for (const auto& [name, report] : reports) {
    out += name;
    for (const auto& head : reports.front().second.rows) {
      const auto& r = report.at(head.n);
      for (double v : {r.precision, r.recall, r.ndcg, r.map}) {
        std::snprintf(buf, sizeof buf, "\t%.4f", v);
        out += buf;
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace apirec
