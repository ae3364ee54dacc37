#pragma once

#include <span>
#include <string>
#include <vector>

#include "cstariff/activation.hpp"
#include "cstariff/data_model.hpp"
#include "cstariff/errors.hpp"
#include "cstariff/vcl.hpp"

namespace cstariff {

/// Per-scenario activation schedules and discomfort stacks for one consumer,
/// index-aligned with the consumer's ScenarioSet.
struct DynamicContext {
  std::vector<ActivationSchedule> schedules;
  std::vector<VclSegmentStack> stacks;
};

namespace detail {

inline void require_regime(const TariffBook& book, Regime regime) {
  book.validate();
  if (book.regime != regime) {
    throw DomainError(std::string("expected a ") + regime_name(regime) +
                      " tariff, got " + regime_name(book.regime));
  }
}

inline void require_level(double x_sub) {
  if (!(x_sub >= 0.0) || !std::isfinite(x_sub)) {
    throw DomainError("subscription level must be finite and non-negative");
  }
}

inline void check_dynamic_inputs(const HourlyLoadSeries& series,
                                 const TariffBook& book,
                                 const ActivationSchedule& schedule,
                                 const VclSegmentStack& stack) {
  if (schedule.year_label != series.year_label()) {
    throw ScenarioMismatch("activation schedule for '" + schedule.year_label +
                           "' applied to year '" + series.year_label() + "'");
  }
  if (!schedule.active_hours.empty() &&
      schedule.active_hours.back() >= series.hours_count()) {
    throw ScenarioMismatch("activation hour " +
                           std::to_string(schedule.active_hours.back()) +
                           " beyond the end of year '" + series.year_label() +
                           "'");
  }
  if (series.peak() > stack.peak_load_kw() * (1.0 + 1e-9)) {
    throw ScenarioMismatch("VCL stack peak below the series peak for '" +
                           series.consumer_id() + "' in " +
                           series.year_label());
  }
  if (!(stack.segments().front().marginal_cost > book.energy_price)) {
    throw DomainError("first VCL segment must cost more than the energy price");
  }
}

}  // namespace detail

inline CostBreakdown cost_energy_tariff(const HourlyLoadSeries& series,
                                        const TariffBook& book) {
  detail::require_regime(book, Regime::EnergyOnly);
  return CostBreakdown::make(book.fixed_annual, 0.0,
                             book.energy_price * series.total(), 0.0, 0.0);
}

/// Load up to the subscription pays the energy price, load above it the
/// excess price.
inline CostBreakdown cost_static_cs(const HourlyLoadSeries& series,
                                    const TariffBook& book, double x_sub) {
  detail::require_regime(book, Regime::StaticCS);
  detail::require_level(x_sub);
  double below = 0.0;
  double above = 0.0;
  for (double load : series.loads()) {
    const double served = std::min(load, x_sub);
    below += served;
    above += load - served;
  }
  return CostBreakdown::make(book.fixed_annual, book.capacity_price * x_sub,
                             book.energy_price * below,
                             book.excess_price * above, 0.0);
}

/// Load is capped at the subscription during active hours only. Curtailed
/// energy is not billed and costs discomfort instead.
inline CostBreakdown cost_dynamic_cs(const HourlyLoadSeries& series,
                                     const TariffBook& book, double x_sub,
                                     const ActivationSchedule& schedule,
                                     const VclSegmentStack& stack) {
  detail::require_regime(book, Regime::DynamicCS);
  detail::require_level(x_sub);
  detail::check_dynamic_inputs(series, book, schedule, stack);
  double served = series.total();
  double discomfort = 0.0;
  for (std::size_t t : schedule.active_hours) {
    const double load = series[t];
    if (load <= x_sub) continue;
    const double cut = load - x_sub;
    served -= cut;
    discomfort += discomfort_cost(stack, cut);
  }
  return CostBreakdown::make(book.fixed_annual, book.capacity_price * x_sub,
                             book.energy_price * served, 0.0, discomfort);
}

/// Cost of one scenario under whichever regime `book` carries. `context`
/// is only consulted for the dynamic regime.
inline CostBreakdown scenario_cost(const ScenarioSet& set, std::size_t index,
                                   const TariffBook& book, double x_sub,
                                   const DynamicContext* context) {
  const auto& series = set[index].series;
  switch (book.regime) {
    case Regime::EnergyOnly:
      return cost_energy_tariff(series, book);
    case Regime::StaticCS:
      return cost_static_cs(series, book, x_sub);
    case Regime::DynamicCS:
      if (context == nullptr || context->schedules.size() != set.size() ||
          context->stacks.size() != set.size()) {
        throw ScenarioMismatch(
            "dynamic costing needs one schedule and one stack per scenario");
      }
      return cost_dynamic_cs(series, book, x_sub, context->schedules[index],
                             context->stacks[index]);
  }
  throw DomainError("unknown regime");
}

/// Probability-weighted annual cost. Fixed and capacity charges are certain
/// and enter unweighted.
inline CostBreakdown expected_cost(const ScenarioSet& set,
                                   const TariffBook& book, double x_sub,
                                   const DynamicContext* context = nullptr) {
  double energy = 0.0, excess = 0.0, discomfort = 0.0;
  CostBreakdown first;
  for (std::size_t s = 0; s < set.size(); ++s) {
    const CostBreakdown c = scenario_cost(set, s, book, x_sub, context);
    if (s == 0) first = c;
    const double p = set[s].probability;
    energy += p * c.energy_below;
    excess += p * c.excess;
    discomfort += p * c.discomfort;
  }
  return CostBreakdown::make(first.fixed, first.capacity, energy, excess,
                             discomfort);
}

}  // namespace cstariff
