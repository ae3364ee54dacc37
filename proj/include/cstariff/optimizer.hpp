#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "cstariff/data_model.hpp"
#include "cstariff/errors.hpp"
#include "cstariff/tariff_engine.hpp"

namespace cstariff {

struct OptimizerOptions {
  /// Smallest admissible subscription level, if the tariff imposes one.
  std::optional<double> min_level;
  /// Evaluate every dynamic candidate instead of bisecting on slope sign.
  bool exhaustive = false;
};

struct OptimizationResult {
  SubscriptionDecision decision;
  CostBreakdown expected_breakdown;
  std::size_t candidate_count = 0;
};

// ---------------------------------------------------------------------------
// Static regime
// ---------------------------------------------------------------------------

/// Sorted distinct loads of a scenario set together with the expected number
/// of hours strictly above each of them. Independent of prices, so it can be
/// reused while a tariff is being calibrated.
class StaticProfile {
 public:
  explicit StaticProfile(const ScenarioSet& set) {
    std::vector<std::pair<double, double>> weighted;
    for (const auto& sc : set.scenarios()) {
      for (double load : sc.series.loads()) {
        if (load > 0.0) weighted.emplace_back(load, sc.probability);
      }
    }
    std::sort(weighted.begin(), weighted.end());
    // levels_[0] = 0 is always a candidate.
    levels_.push_back(0.0);
    for (const auto& [load, p] : weighted) {
      if (load != levels_.back()) levels_.push_back(load);
    }
    hours_above_.assign(levels_.size(), 0.0);
    // Walk from the top accumulating weight of strictly larger loads.
    double above = 0.0;
    std::size_t k = levels_.size();
    std::size_t i = weighted.size();
    while (k-- > 0) {
      while (i > 0 && weighted[i - 1].first > levels_[k]) {
        above += weighted[i - 1].second;
        --i;
      }
      hours_above_[k] = above;
    }
  }

  std::span<const double> levels() const noexcept { return levels_; }
  /// Expected count of hours with load strictly above levels()[k].
  std::span<const double> hours_above() const noexcept { return hours_above_; }

 private:
  std::vector<double> levels_;
  std::vector<double> hours_above_;
};

namespace detail {

inline void require_static_book(const TariffBook& book) {
  if (book.regime != Regime::StaticCS) {
    throw DomainError("static optimization needs a static CS tariff");
  }
  if (!(book.excess_price > book.energy_price)) {
    throw IllPosed(
        "excess price must exceed the energy price for a bounded optimum");
  }
  book.validate();
}

inline double apply_floor(double x, const OptimizerOptions& options) {
  if (options.min_level) {
    if (!(*options.min_level >= 0.0)) {
      throw DomainError("minimum subscription level must be non-negative");
    }
    return std::max(x, *options.min_level);
  }
  return x;
}

}  // namespace detail

/// Minimizer of expected static cost over a precomputed profile.
///
/// The subgradient in x is C^sub - (C^h - C^l) * H(x), with H(x) the expected
/// hours above x, so the optimum is the smallest breakpoint where H(x) drops
/// to C^sub / (C^h - C^l).
inline double static_argmin(const StaticProfile& profile,
                            const TariffBook& book) {
  detail::require_static_book(book);
  const double target =
      book.capacity_price / (book.excess_price - book.energy_price);
  const auto levels = profile.levels();
  const auto above = profile.hours_above();
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (above[k] <= target) return levels[k];
  }
  return levels.back();
}

inline OptimizationResult optimize_static(const ScenarioSet& set,
                                          const StaticProfile& profile,
                                          const TariffBook& book,
                                          const OptimizerOptions& options = {}) {
  const double x = detail::apply_floor(static_argmin(profile, book), options);
  return {SubscriptionDecision(x, policy::Stochastic{}),
          expected_cost(set, book, x), profile.levels().size()};
}

inline OptimizationResult optimize_static(const ScenarioSet& set,
                                          const TariffBook& book,
                                          const OptimizerOptions& options = {}) {
  detail::require_static_book(book);
  return optimize_static(set, StaticProfile(set), book, options);
}

/// Candidate levels of the static objective: 0 and every distinct load.
inline std::vector<double> static_candidates(const ScenarioSet& set) {
  const StaticProfile profile(set);
  return {profile.levels().begin(), profile.levels().end()};
}

// ---------------------------------------------------------------------------
// Dynamic regime
// ---------------------------------------------------------------------------

/// Active-hour loads and discomfort stacks of one consumer, with the sorted
/// breakpoints of the dynamic objective. Independent of the capacity price.
class DynamicProfile {
 public:
  DynamicProfile(const ScenarioSet& set, const DynamicContext& context)
      : context_(&context) {
    if (context.schedules.size() != set.size() ||
        context.stacks.size() != set.size()) {
      throw ScenarioMismatch(
          "dynamic optimization needs one schedule and one stack per scenario");
    }
    candidates_.push_back(0.0);
    for (std::size_t s = 0; s < set.size(); ++s) {
      const auto& series = set[s].series;
      const auto& schedule = context.schedules[s];
      const auto& stack = context.stacks[s];
      if (schedule.year_label != series.year_label()) {
        throw ScenarioMismatch("schedule '" + schedule.year_label +
                               "' does not match scenario '" +
                               series.year_label() + "'");
      }
      if (series.peak() > stack.peak_load_kw() * (1.0 + 1e-9)) {
        throw ScenarioMismatch("VCL stack peak below the series peak");
      }
      ScenarioTerms terms{set[s].probability, series.total(), {}, &stack};
      for (std::size_t t : schedule.active_hours) {
        if (t >= series.hours_count()) {
          throw ScenarioMismatch("activation hour beyond the end of the year");
        }
        const double load = series[t];
        if (load <= 0.0) continue;
        terms.active_loads.push_back(load);
        // Cut crosses a segment boundary where load - x equals a cumulative
        // segment width.
        double boundary = 0.0;
        candidates_.push_back(load);
        for (std::size_t j = 0; j + 1 < stack.segment_count(); ++j) {
          boundary += stack.segments()[j].width_kw;
          candidates_.push_back(std::max(0.0, load - boundary));
        }
      }
      terms_.push_back(std::move(terms));
    }
    // load - boundary rounding leaves near-duplicates; keep the smaller one.
    std::sort(candidates_.begin(), candidates_.end());
    candidates_.erase(
        std::unique(candidates_.begin(), candidates_.end(),
                    [](double a, double b) {
                      return b - a <= 1e-12 * std::max(1.0, b);
                    }),
        candidates_.end());
  }

  std::span<const double> candidates() const noexcept { return candidates_; }
  const DynamicContext& context() const noexcept { return *context_; }

  /// Expected total welfare cost at level x.
  double objective(const TariffBook& book, double x) const {
    double expected = 0.0;
    for (const auto& terms : terms_) {
      double served = terms.total_energy;
      double discomfort = 0.0;
      for (double load : terms.active_loads) {
        if (load <= x) continue;
        const double cut = load - x;
        served -= cut;
        discomfort += discomfort_cost(*terms.stack, cut);
      }
      expected += terms.probability * (book.energy_price * served + discomfort);
    }
    return book.fixed_annual + book.capacity_price * x + expected;
  }

 private:
  struct ScenarioTerms {
    double probability;
    double total_energy;
    std::vector<double> active_loads;
    const VclSegmentStack* stack;
  };

  const DynamicContext* context_;
  std::vector<ScenarioTerms> terms_;
  std::vector<double> candidates_;
};

/// Level minimizing expected total welfare among the profile's candidates,
/// ties going to the smaller level.
inline double dynamic_argmin(const DynamicProfile& profile,
                             const TariffBook& book,
                             const OptimizerOptions& options = {}) {
  detail::require_regime(book, Regime::DynamicCS);
  std::vector<double> cands(profile.candidates().begin(),
                            profile.candidates().end());
  if (options.min_level) {
    const double floor = detail::apply_floor(0.0, options);
    std::erase_if(cands, [floor](double c) { return c < floor; });
    cands.insert(cands.begin(), floor);
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  }
  if (options.exhaustive) {
    std::size_t best = 0;
    double best_cost = profile.objective(book, cands[0]);
    for (std::size_t i = 1; i < cands.size(); ++i) {
      const double c = profile.objective(book, cands[i]);
      if (c < best_cost) {
        best = i;
        best_cost = c;
      }
    }
    return cands[best];
  }
  // The objective is convex along the sorted candidates, so the successive
  // differences change sign once.
  std::size_t lo = 0, hi = cands.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (profile.objective(book, cands[mid + 1]) <
        profile.objective(book, cands[mid])) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return cands[lo];
}

inline OptimizationResult optimize_dynamic(const ScenarioSet& set,
                                           const DynamicProfile& profile,
                                           const TariffBook& book,
                                           const OptimizerOptions& options = {}) {
  const double x = dynamic_argmin(profile, book, options);
  return {SubscriptionDecision(x, policy::Stochastic{}),
          expected_cost(set, book, x, &profile.context()),
          profile.candidates().size()};
}

inline OptimizationResult optimize_dynamic(const ScenarioSet& set,
                                           const TariffBook& book,
                                           const DynamicContext& context,
                                           const OptimizerOptions& options = {}) {
  detail::require_regime(book, Regime::DynamicCS);
  return optimize_dynamic(set, DynamicProfile(set, context), book, options);
}

inline std::vector<double> dynamic_candidates(const ScenarioSet& set,
                                              const DynamicContext& context) {
  const DynamicProfile profile(set, context);
  return {profile.candidates().begin(), profile.candidates().end()};
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

/// Stochastic optimum under either CS regime.
inline OptimizationResult optimize_stochastic(
    const ScenarioSet& set, const TariffBook& book,
    const DynamicContext* context = nullptr,
    const OptimizerOptions& options = {}) {
  switch (book.regime) {
    case Regime::StaticCS:
      return optimize_static(set, book, options);
    case Regime::DynamicCS:
      if (context == nullptr) {
        throw ScenarioMismatch("dynamic optimization needs activation data");
      }
      return optimize_dynamic(set, book, *context, options);
    case Regime::EnergyOnly:
      break;
  }
  throw DomainError("energy-only tariffs have no subscription to optimize");
}

/// Perfect-foresight optimum for a single year.
inline OptimizationResult optimize_deterministic(
    const HourlyLoadSeries& series, const TariffBook& book,
    const OptimizerOptions& options = {}) {
  const ScenarioSet single({{series, 1.0}});
  auto result = optimize_static(single, book, options);
  result.decision.policy = policy::Deterministic{series.year_label()};
  return result;
}

inline OptimizationResult optimize_deterministic(
    const HourlyLoadSeries& series, const TariffBook& book,
    const ActivationSchedule& schedule, const VclSegmentStack& stack,
    const OptimizerOptions& options = {}) {
  const ScenarioSet single({{series, 1.0}});
  const DynamicContext context{{schedule}, {stack}};
  auto result = optimize_dynamic(single, book, context, options);
  result.decision.policy = policy::Deterministic{series.year_label()};
  return result;
}

/// Last year's perfect-foresight level, reused for the coming year.
inline SubscriptionDecision reactive_level(const HourlyLoadSeries& previous_year,
                                           const TariffBook& book,
                                           const OptimizerOptions& options = {}) {
  return {optimize_deterministic(previous_year, book, options).decision.level,
          policy::Reactive{previous_year.year_label()}};
}

inline SubscriptionDecision reactive_level(
    const HourlyLoadSeries& previous_year, const TariffBook& book,
    const ActivationSchedule& schedule, const VclSegmentStack& stack,
    const OptimizerOptions& options = {}) {
  return {optimize_deterministic(previous_year, book, schedule, stack, options)
              .decision.level,
          policy::Reactive{previous_year.year_label()}};
}

}  // namespace cstariff
