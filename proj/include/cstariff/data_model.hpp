#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "cstariff/errors.hpp"

namespace cstariff {

inline constexpr std::size_t kHoursPerYear = 8760;
inline constexpr std::size_t kHoursPerLeapYear = 8784;

/// Hourly energy use (kWh/h) of one consumer over one weather year.
///
/// Immutable once built. The general constructor accepts any non-empty
/// window so that short hand-made profiles can be costed; `full_year`
/// additionally requires a calendar-year length.
class HourlyLoadSeries {
 public:
  HourlyLoadSeries(std::string consumer_id, std::string year_label,
                   std::vector<double> loads)
      : consumer_id_(std::move(consumer_id)),
        year_label_(std::move(year_label)),
        loads_(std::move(loads)) {
    if (loads_.empty()) {
      throw DomainError("load series for '" + consumer_id_ + "' is empty");
    }
    for (std::size_t t = 0; t < loads_.size(); ++t) {
      const double v = loads_[t];
      if (!std::isfinite(v)) {
        throw DomainError("non-finite load at hour " + std::to_string(t) +
                          " for '" + consumer_id_ + "'");
      }
      if (v < 0.0) {
        throw NegativeLoad("negative load at hour " + std::to_string(t) +
                           " for '" + consumer_id_ + "'");
      }
      peak_ = std::max(peak_, v);
      total_ += v;
    }
  }

  static HourlyLoadSeries full_year(std::string consumer_id,
                                    std::string year_label,
                                    std::vector<double> loads) {
    if (loads.size() != kHoursPerYear && loads.size() != kHoursPerLeapYear) {
      throw DomainError("a full year has 8760 or 8784 hours, got " +
                        std::to_string(loads.size()));
    }
    return {std::move(consumer_id), std::move(year_label), std::move(loads)};
  }

  const std::string& consumer_id() const noexcept { return consumer_id_; }
  const std::string& year_label() const noexcept { return year_label_; }
  std::span<const double> loads() const noexcept { return loads_; }
  std::size_t hours_count() const noexcept { return loads_.size(); }
  double operator[](std::size_t t) const { return loads_[t]; }

  double peak() const noexcept { return peak_; }
  double total() const noexcept { return total_; }

  friend bool operator==(const HourlyLoadSeries&,
                         const HourlyLoadSeries&) = default;

 private:
  std::string consumer_id_;
  std::string year_label_;
  std::vector<double> loads_;
  double peak_ = 0.0;
  double total_ = 0.0;
};

struct Scenario {
  HourlyLoadSeries series;
  double probability;
};

/// Weather-year scenarios of a single consumer.
class ScenarioSet {
 public:
  explicit ScenarioSet(std::vector<Scenario> scenarios)
      : scenarios_(std::move(scenarios)) {
    if (scenarios_.empty()) {
      throw DomainError("scenario set must contain at least one scenario");
    }
    double sum = 0.0;
    std::unordered_set<std::string> labels;
    for (const auto& s : scenarios_) {
      if (!(s.probability >= 0.0 && s.probability <= 1.0)) {
        throw DomainError("scenario probability outside [0,1]");
      }
      if (s.series.consumer_id() != scenarios_.front().series.consumer_id()) {
        throw ScenarioMismatch("scenario set mixes consumers '" +
                               scenarios_.front().series.consumer_id() +
                               "' and '" + s.series.consumer_id() + "'");
      }
      if (!labels.insert(s.series.year_label()).second) {
        throw ScenarioMismatch("duplicate scenario year '" +
                               s.series.year_label() + "'");
      }
      sum += s.probability;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw DomainError("scenario probabilities sum to " +
                        std::to_string(sum) + ", expected 1");
    }
  }

  /// Every series gets probability 1/n.
  static ScenarioSet equiprobable(std::vector<HourlyLoadSeries> series) {
    std::vector<Scenario> scenarios;
    scenarios.reserve(series.size());
    const double p = series.empty() ? 0.0 : 1.0 / double(series.size());
    for (auto& s : series) scenarios.push_back({std::move(s), p});
    return ScenarioSet(std::move(scenarios));
  }

  const std::string& consumer_id() const noexcept {
    return scenarios_.front().series.consumer_id();
  }
  std::span<const Scenario> scenarios() const noexcept { return scenarios_; }
  std::size_t size() const noexcept { return scenarios_.size(); }
  const Scenario& operator[](std::size_t i) const { return scenarios_[i]; }

 private:
  std::vector<Scenario> scenarios_;
};

enum class Regime { EnergyOnly, StaticCS, DynamicCS };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::EnergyOnly: return "energy";
    case Regime::StaticCS: return "static";
    case Regime::DynamicCS: return "dynamic";
  }
  return "?";
}

/// Prices of one tariff regime, all in EUR (EUR/year, EUR/kW-year, EUR/kWh).
struct TariffBook {
  double fixed_annual = 0.0;
  double capacity_price = 0.0;
  double energy_price = 0.0;
  double excess_price = 0.0;
  double voll = 0.0;
  Regime regime = Regime::EnergyOnly;

  void validate() const {
    for (double v : {fixed_annual, capacity_price, energy_price, excess_price,
                     voll}) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("tariff prices must be finite and non-negative");
      }
    }
    switch (regime) {
      case Regime::EnergyOnly:
        if (capacity_price != 0.0 || excess_price != 0.0) {
          throw DomainError(
              "energy-only tariff cannot carry capacity or excess prices");
        }
        break;
      case Regime::StaticCS:
        if (!(excess_price > energy_price)) {
          throw DomainError("static CS needs excess price above energy price");
        }
        break;
      case Regime::DynamicCS:
        if (!(voll > 0.0)) throw DomainError("dynamic CS needs VoLL > 0");
        break;
    }
  }

  static TariffBook energy_only(double fixed, double energy) {
    TariffBook b{fixed, 0.0, energy, 0.0, 0.0, Regime::EnergyOnly};
    b.validate();
    return b;
  }
  static TariffBook static_cs(double fixed, double capacity, double energy,
                              double excess) {
    TariffBook b{fixed, capacity, energy, excess, 0.0, Regime::StaticCS};
    b.validate();
    return b;
  }
  static TariffBook dynamic_cs(double fixed, double capacity, double energy,
                               double voll) {
    TariffBook b{fixed, capacity, energy, 0.0, voll, Regime::DynamicCS};
    b.validate();
    return b;
  }

  TariffBook with_capacity_price(double c) const {
    TariffBook b = *this;
    b.capacity_price = c;
    return b;
  }

  friend bool operator==(const TariffBook&, const TariffBook&) = default;
};

/// Itemized annual cost. Build through `make`, which fills the totals.
struct CostBreakdown {
  double fixed = 0.0;
  double capacity = 0.0;
  double energy_below = 0.0;
  double excess = 0.0;
  double discomfort = 0.0;
  double total_monetary = 0.0;
  double total_welfare = 0.0;

  static CostBreakdown make(double fixed, double capacity, double energy_below,
                            double excess, double discomfort) {
    CostBreakdown c{fixed, capacity, energy_below, excess, discomfort, 0.0, 0.0};
    c.total_monetary = fixed + capacity + energy_below + excess;
    c.total_welfare = c.total_monetary + discomfort;
    return c;
  }

  CostBreakdown& operator+=(const CostBreakdown& o) {
    *this = make(fixed + o.fixed, capacity + o.capacity,
                 energy_below + o.energy_below, excess + o.excess,
                 discomfort + o.discomfort);
    return *this;
  }
};

namespace policy {
struct Deterministic {
  std::string year_label;
  friend bool operator==(const Deterministic&, const Deterministic&) = default;
};
struct Stochastic {
  friend bool operator==(const Stochastic&, const Stochastic&) = default;
};
struct Reactive {
  std::string source_year_label;
  friend bool operator==(const Reactive&, const Reactive&) = default;
};
struct Fixed {
  double value;
  friend bool operator==(const Fixed&, const Fixed&) = default;
};
}  // namespace policy

using Policy = std::variant<policy::Deterministic, policy::Stochastic,
                            policy::Reactive, policy::Fixed>;

inline const char* policy_name(const Policy& p) {
  static constexpr const char* names[] = {"det", "stoch", "reactive", "fixed"};
  return names[p.index()];
}

struct SubscriptionDecision {
  double level = 0.0;  // kW
  Policy policy = policy::Stochastic{};

  SubscriptionDecision() = default;
  SubscriptionDecision(double lvl, Policy p) : level(lvl), policy(std::move(p)) {
    if (!(level >= 0.0) || !std::isfinite(level)) {
      throw DomainError("subscription level must be finite and non-negative");
    }
  }
};

/// Annual energy over peak load.
inline double full_load_hours(const HourlyLoadSeries& series) {
  if (!(series.peak() > 0.0)) {
    throw DegenerateProfile("all-zero load profile for '" +
                            series.consumer_id() + "' in " +
                            series.year_label());
  }
  return series.total() / series.peak();
}

/// Full load hours normalized by the series length; in (0, 1].
inline double load_factor(const HourlyLoadSeries& series) {
  return full_load_hours(series) / double(series.hours_count());
}

}  // namespace cstariff
