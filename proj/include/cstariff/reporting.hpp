#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cstariff/data_model.hpp"
#include "cstariff/errors.hpp"

namespace cstariff {

/// Box plot summary. Quartiles interpolate linearly between order
/// statistics; whiskers sit at mean +- 1.5 sample standard deviations,
/// clamped to the data range.
struct BoxplotStats {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::vector<double> outliers;  // ascending
};

inline constexpr const char* kWhiskerConvention =
    "whiskers = mean +/- 1.5 * sample stddev clamped to data range; "
    "quartiles linearly interpolated";

/// Linear interpolation at position q*(n-1) of an ascending sample.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  const double pos = q * double(sorted.size() - 1);
  const auto lo = std::size_t(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - double(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline BoxplotStats boxplot_stats(std::span<const double> values) {
  if (values.empty()) throw DomainError("box plot needs at least one value");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxplotStats s;
  s.median = quantile_sorted(sorted, 0.5);
  s.q25 = quantile_sorted(sorted, 0.25);
  s.q75 = quantile_sorted(sorted, 0.75);
  const double n = double(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = sorted.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.whisker_lo = std::max(sorted.front(), mean - 1.5 * sd);
  s.whisker_hi = std::min(sorted.back(), mean + 1.5 * sd);
  for (double v : sorted) {
    if (v < s.whisker_lo || v > s.whisker_hi) s.outliers.push_back(v);
  }
  return s;
}

struct RelativeCostPoint {
  std::size_t rank;      // 1-based position in the sorted curve
  std::size_t consumer;  // index into the input vectors
  double ratio;
};

/// Per-consumer a/b ratios, ascending; equal ratios keep consumer order.
inline std::vector<RelativeCostPoint> relative_cost_curve(
    std::span<const double> costs_a, std::span<const double> costs_b) {
  if (costs_a.size() != costs_b.size()) {
    throw DomainError("cost vectors differ in length");
  }
  std::vector<RelativeCostPoint> points;
  points.reserve(costs_a.size());
  for (std::size_t i = 0; i < costs_a.size(); ++i) {
    if (!(costs_b[i] > 0.0)) {
      throw DomainError("reference cost must be positive for every consumer");
    }
    points.push_back({0, i, costs_a[i] / costs_b[i]});
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& x, const auto& y) { return x.ratio < y.ratio; });
  for (std::size_t r = 0; r < points.size(); ++r) points[r].rank = r + 1;
  return points;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("least squares needs two or more paired points");
  }
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("least squares needs distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, x.size()};
}

/// One evaluated (consumer, year, regime, policy) cost.
struct CostRecord {
  std::size_t consumer;
  std::size_t year_index;
  Regime regime;
  std::string policy;  // det | stoch | reactive | baseline
  CostBreakdown breakdown;
};

struct AggregateRow {
  std::size_t year_index;
  Regime regime;
  std::string policy;
  double monetary = 0.0;
  double discomfort = 0.0;
  double welfare = 0.0;
  std::size_t consumers = 0;
};

inline int policy_rank(const std::string& p) {
  if (p == "baseline") return 0;
  if (p == "det") return 1;
  if (p == "stoch") return 2;
  if (p == "reactive") return 3;
  return 4;
}

/// Population totals per (year, regime, policy). Rows come out ordered by
/// year, then regime, then policy; sums run in record order.
inline std::vector<AggregateRow> aggregate_revenue_table(
    std::span<const CostRecord> records) {
  using Key = std::tuple<std::size_t, int, int, std::string>;
  std::map<Key, AggregateRow> rows;
  for (const auto& r : records) {
    const Key key{r.year_index, int(r.regime), policy_rank(r.policy), r.policy};
    auto [it, inserted] =
        rows.try_emplace(key, AggregateRow{r.year_index, r.regime, r.policy});
    auto& row = it->second;
    row.monetary += r.breakdown.total_monetary;
    row.discomfort += r.breakdown.discomfort;
    row.welfare += r.breakdown.total_welfare;
    ++row.consumers;
  }
  std::vector<AggregateRow> out;
  out.reserve(rows.size());
  for (auto& [key, row] : rows) out.push_back(std::move(row));
  return out;
}

}  // namespace cstariff
