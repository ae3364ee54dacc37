#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <variant>
#include <vector>

#include "cstariff/data_model.hpp"
#include "cstariff/errors.hpp"
#include "cstariff/optimizer.hpp"
#include "cstariff/parallel.hpp"
#include "cstariff/tariff_engine.hpp"

namespace cstariff {

struct CalibrationOptions {
  double tolerance = 1e-4;  // relative gap to the reference revenue
  double initial_upper = 0.0;  // 0: start from the base book's capacity price
  int max_iterations = 200;
  unsigned jobs = 1;
  OptimizerOptions optimizer{};
};

struct CalibrationStep {
  double capacity_price;
  double aggregate_cost;
};

struct CalibrationResult {
  TariffBook book;
  double reference_revenue = 0.0;
  double aggregate_cost = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  /// Every price tried, in evaluation order.
  std::vector<CalibrationStep> trace;
};

/// Sum over consumers of the expected annual energy-tariff bill.
inline double energy_tariff_revenue(std::span<const ScenarioSet> population,
                                    const TariffBook& energy_book) {
  double total = 0.0;
  for (const auto& set : population) {
    total += expected_cost(set, energy_book, 0.0).total_monetary;
  }
  return total;
}

/// Aggregate cost of the population with every consumer on its stochastic
/// optimum for a given capacity price. Static tariffs count monetary cost,
/// dynamic tariffs add discomfort.
class AggregateCost {
 public:
  AggregateCost(std::span<const ScenarioSet> population, TariffBook base_book,
                std::span<const DynamicContext> contexts,
                CalibrationOptions options)
      : population_(population),
        book_(base_book),
        options_(options) {
    if (book_.regime == Regime::EnergyOnly) {
      throw DomainError("capacity price calibration needs a CS tariff");
    }
    if (population_.empty()) throw DomainError("empty population");
    if (book_.regime == Regime::StaticCS) {
      detail::require_static_book(book_);
      for (const auto& set : population_) statics_.emplace_back(set);
    } else {
      book_.validate();
      if (contexts.size() != population_.size()) {
        throw ScenarioMismatch(
            "dynamic calibration needs activation data per consumer");
      }
      for (std::size_t i = 0; i < population_.size(); ++i) {
        dynamics_.emplace_back(population_[i], contexts[i]);
      }
    }
  }

  const TariffBook& base_book() const noexcept { return book_; }

  double operator()(double capacity_price) const {
    const TariffBook book = book_.with_capacity_price(capacity_price);
    std::vector<double> costs(population_.size());
    parallel_for(population_.size(), options_.jobs, [&](std::size_t i) {
      if (book.regime == Regime::StaticCS) {
        costs[i] = optimize_static(population_[i], statics_[i], book,
                                   options_.optimizer)
                       .expected_breakdown.total_monetary;
      } else {
        costs[i] = optimize_dynamic(population_[i], dynamics_[i], book,
                                    options_.optimizer)
                       .expected_breakdown.total_welfare;
      }
    });
    double total = 0.0;
    for (double c : costs) total += c;
    return total;
  }

 private:
  std::span<const ScenarioSet> population_;
  TariffBook book_;
  CalibrationOptions options_;
  std::vector<StaticProfile> statics_;
  std::vector<DynamicProfile> dynamics_;
};

/// Bisection for the capacity price at which the re-optimized population
/// pays `reference_revenue`. The aggregate is continuous and non-decreasing
/// in the price (a sum of pointwise minima of affine functions).
inline CalibrationResult calibrate_capacity_price(
    std::span<const ScenarioSet> population, const TariffBook& base_book,
    double reference_revenue, std::span<const DynamicContext> contexts = {},
    const CalibrationOptions& options = {}) {
  if (!(reference_revenue > 0.0) || !std::isfinite(reference_revenue)) {
    throw DomainError("reference revenue must be positive");
  }
  if (!(options.tolerance > 0.0)) {
    throw DomainError("calibration tolerance must be positive");
  }
  const AggregateCost aggregate(population, base_book, contexts, options);

  CalibrationResult result;
  result.reference_revenue = reference_revenue;
  auto eval = [&](double c) {
    const double v = aggregate(c);
    result.trace.push_back({c, v});
    return v;
  };
  auto gap = [&](double v) {
    return std::abs(v - reference_revenue) / reference_revenue;
  };
  auto finish = [&](double c, double v, int iterations) {
    result.book = base_book.with_capacity_price(c);
    result.aggregate_cost = v;
    result.relative_gap = gap(v);
    result.iterations = iterations;
    return result;
  };

  double lo = 0.0;
  const double at_zero = eval(lo);
  if (gap(at_zero) < options.tolerance) return finish(lo, at_zero, 0);
  if (at_zero > reference_revenue) {
    std::ostringstream msg;
    msg << "aggregate cost at zero capacity price (" << at_zero
        << ") already exceeds the reference revenue (" << reference_revenue
        << ")";
    throw CalibrationFailed(msg.str());
  }

  const double initial = options.initial_upper > 0.0 ? options.initial_upper
                         : base_book.capacity_price > 0.0
                             ? base_book.capacity_price
                             : 1.0;
  double hi = initial;
  double at_hi = eval(hi);
  while (at_hi < reference_revenue) {
    if (gap(at_hi) < options.tolerance) return finish(hi, at_hi, 0);
    lo = hi;
    hi *= 2.0;
    if (hi > initial * 65536.0) {
      std::ostringstream msg;
      msg << "no capacity price up to " << initial * 65536.0
          << " EUR/kW-year reaches the reference revenue " << reference_revenue
          << " (aggregate there: " << at_hi << ")";
      throw CalibrationFailed(msg.str());
    }
    at_hi = eval(hi);
  }
  if (gap(at_hi) < options.tolerance) return finish(hi, at_hi, 0);

  for (int it = 1; it <= options.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = eval(mid);
    if (gap(v) < options.tolerance) return finish(mid, v, it);
    (v < reference_revenue ? lo : hi) = mid;
  }
  std::ostringstream msg;
  msg << "bisection did not reach relative gap " << options.tolerance
      << " within " << options.max_iterations << " iterations (bracket [" << lo
      << ", " << hi << "])";
  throw CalibrationFailed(msg.str());
}

}  // namespace cstariff
