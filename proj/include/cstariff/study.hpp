#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cstariff/activation.hpp"
#include "cstariff/calibration.hpp"
#include "cstariff/data_model.hpp"
#include "cstariff/format.hpp"
#include "cstariff/optimizer.hpp"
#include "cstariff/parallel.hpp"
#include "cstariff/reporting.hpp"
#include "cstariff/tariff_config.hpp"
#include "cstariff/tariff_engine.hpp"
#include "cstariff/vcl.hpp"

namespace cstariff {

enum class PolicyKind { Deterministic, Stochastic, Reactive };

inline const char* policy_kind_name(PolicyKind p) {
  switch (p) {
    case PolicyKind::Deterministic: return "det";
    case PolicyKind::Stochastic: return "stoch";
    case PolicyKind::Reactive: return "reactive";
  }
  return "?";
}

inline PolicyKind parse_policy_kind(const std::string& s) {
  if (s == "det") return PolicyKind::Deterministic;
  if (s == "stoch") return PolicyKind::Stochastic;
  if (s == "reactive") return PolicyKind::Reactive;
  throw InputError("unknown policy '" + s + "' (expected det, stoch or reactive)");
}

inline Regime parse_regime(const std::string& s) {
  if (s == "energy") return Regime::EnergyOnly;
  if (s == "static") return Regime::StaticCS;
  if (s == "dynamic") return Regime::DynamicCS;
  throw InputError("unknown regime '" + s + "' (expected energy, static or dynamic)");
}

struct StudyInputs {
  std::vector<ScenarioSet> population;
  TariffConfig tariffs;
  std::vector<Regime> regimes;  // CS regimes to run; the energy baseline always runs
  std::vector<PolicyKind> policies;
  std::optional<double> threshold_kw;
  /// Exogenous schedules; years without an entry get none.
  std::optional<std::vector<ActivationSchedule>> activations;
  int vcl_segments = kDefaultVclSegments;
  bool calibrate = false;
  double calibration_tolerance = 1e-4;
  OptimizerOptions optimizer{};
  unsigned jobs = 1;
};

struct LevelRecord {
  std::size_t consumer;
  std::size_t year_index;
  Regime regime;
  std::string policy;
  double level;
};

struct ConsumerOutcome {
  std::vector<double> full_load_hours;  // per year
  std::vector<double> load_factor;      // per year
  std::vector<LevelRecord> levels;
  std::vector<CostRecord> costs;
};

struct StudyResult {
  std::vector<std::string> consumer_ids;
  std::vector<std::string> years;
  std::vector<Regime> regimes;
  std::vector<PolicyKind> policies;
  TariffConfig tariffs;  // after calibration, if any
  std::vector<ActivationSchedule> schedules;
  std::map<Regime, CalibrationResult> calibrations;
  std::vector<ConsumerOutcome> consumers;
};

namespace detail {

inline std::vector<std::string> common_years(std::span<const ScenarioSet> population) {
  if (population.empty()) throw InputError("population is empty");
  std::vector<std::string> years;
  for (const auto& sc : population.front().scenarios()) {
    years.push_back(sc.series.year_label());
  }
  for (const auto& set : population) {
    bool same = set.size() == years.size();
    for (std::size_t y = 0; same && y < years.size(); ++y) {
      same = set[y].series.year_label() == years[y];
    }
    if (!same) {
      throw ScenarioMismatch("consumer '" + set.consumer_id() +
                             "' does not cover the same years as '" +
                             population.front().consumer_id() + "'");
    }
  }
  return years;
}

inline std::vector<ActivationSchedule> study_schedules(
    std::span<const ScenarioSet> population, const std::vector<std::string>& years,
    const StudyInputs& in) {
  std::vector<ActivationSchedule> schedules;
  if (in.activations) {
    for (const auto& s : *in.activations) {
      if (std::find(years.begin(), years.end(), s.year_label) == years.end()) {
        throw ScenarioMismatch("activation file names year '" + s.year_label +
                               "' which is not in the load data");
      }
    }
    for (const auto& year : years) {
      const auto it = std::find_if(
          in.activations->begin(), in.activations->end(),
          [&](const ActivationSchedule& s) { return s.year_label == year; });
      schedules.push_back(it != in.activations->end()
                              ? *it
                              : ActivationSchedule{year, {}, 0.0});
    }
    return schedules;
  }
  if (!in.threshold_kw) {
    throw InputError("dynamic regime needs --threshold-kw or an activation file");
  }
  for (std::size_t y = 0; y < years.size(); ++y) {
    std::vector<const HourlyLoadSeries*> members;
    for (const auto& set : population) members.push_back(&set[y].series);
    schedules.push_back(derive_activations(
        std::span<const HourlyLoadSeries* const>(members), *in.threshold_kw));
  }
  return schedules;
}

inline DynamicContext consumer_context(const ScenarioSet& set,
                                       const std::vector<ActivationSchedule>& schedules,
                                       const VclCurveParams& vcl, int segments) {
  DynamicContext ctx;
  ctx.schedules = schedules;
  for (const auto& sc : set.scenarios()) {
    ctx.stacks.push_back(build_segment_stack(vcl, sc.series.peak(), segments));
  }
  return ctx;
}

inline void check_dominance(const ScenarioSet& set, Regime regime,
                            const CostBreakdown& det, const CostBreakdown& stoch,
                            std::size_t y) {
  if (det.total_welfare > stoch.total_welfare * (1.0 + 1e-9) + 1e-9) {
    throw InvariantViolation(
        std::string("perfect-foresight cost above stochastic cost for '") +
        set.consumer_id() + "' in " + set[y].series.year_label() + " (" +
        regime_name(regime) + ")");
  }
}

}  // namespace detail

/// Runs every requested regime and policy for every consumer.
inline StudyResult run_study(const StudyInputs& in) {
  if (in.policies.empty()) throw InputError("no policies requested");
  StudyResult result;
  result.years = detail::common_years(in.population);
  result.policies = in.policies;
  result.tariffs = in.tariffs;
  for (Regime r : in.regimes) {
    if (r != Regime::EnergyOnly &&
        std::find(result.regimes.begin(), result.regimes.end(), r) ==
            result.regimes.end()) {
      result.regimes.push_back(r);
    }
  }
  const TariffBook energy_book = in.tariffs.book(Regime::EnergyOnly);
  for (Regime r : result.regimes) (void)in.tariffs.book(r);
  for (const auto& set : in.population) result.consumer_ids.push_back(set.consumer_id());

  const bool dynamic = std::find(result.regimes.begin(), result.regimes.end(),
                                 Regime::DynamicCS) != result.regimes.end();
  std::vector<DynamicContext> contexts;
  if (dynamic) {
    result.schedules = detail::study_schedules(in.population, result.years, in);
    contexts.resize(in.population.size());
    parallel_for(in.population.size(), in.jobs, [&](std::size_t i) {
      contexts[i] = detail::consumer_context(in.population[i], result.schedules,
                                             in.tariffs.vcl, in.vcl_segments);
    });
  }

  if (in.calibrate) {
    const double reference = energy_tariff_revenue(in.population, energy_book);
    CalibrationOptions opts;
    opts.tolerance = in.calibration_tolerance;
    opts.jobs = in.jobs;
    opts.optimizer = in.optimizer;
    for (Regime r : result.regimes) {
      auto cal = calibrate_capacity_price(
          in.population, in.tariffs.book(r), reference,
          r == Regime::DynamicCS ? std::span<const DynamicContext>(contexts)
                                 : std::span<const DynamicContext>{},
          opts);
      result.tariffs.set_book(cal.book);
      result.calibrations.emplace(r, std::move(cal));
    }
  }

  const auto wants = [&](PolicyKind p) {
    return std::find(in.policies.begin(), in.policies.end(), p) != in.policies.end();
  };
  const std::size_t years = result.years.size();
  result.consumers.resize(in.population.size());
  parallel_for(in.population.size(), in.jobs, [&](std::size_t i) {
    const ScenarioSet& set = in.population[i];
    ConsumerOutcome& out = result.consumers[i];
    for (std::size_t y = 0; y < years; ++y) {
      out.full_load_hours.push_back(full_load_hours(set[y].series));
      out.load_factor.push_back(load_factor(set[y].series));
      out.costs.push_back({i, y, Regime::EnergyOnly, "baseline",
                           cost_energy_tariff(set[y].series, energy_book)});
    }
    for (Regime regime : result.regimes) {
      const TariffBook& book = result.tariffs.book(regime);
      const DynamicContext* ctx = regime == Regime::DynamicCS ? &contexts[i] : nullptr;
      auto year_cost = [&](std::size_t y, double x) {
        if (regime == Regime::StaticCS) return cost_static_cs(set[y].series, book, x);
        return cost_dynamic_cs(set[y].series, book, x, ctx->schedules[y], ctx->stacks[y]);
      };
      const auto stoch = optimize_stochastic(set, book, ctx, in.optimizer);
      const double x_stoch = stoch.decision.level;
      const auto recheck = expected_cost(set, book, x_stoch, ctx);
      if (std::abs(recheck.total_welfare - stoch.expected_breakdown.total_welfare) >
          1e-9 * std::max(1.0, std::abs(recheck.total_welfare))) {
        throw InvariantViolation("optimizer breakdown does not re-evaluate");
      }
      std::vector<double> x_det(years);
      for (std::size_t y = 0; y < years; ++y) {
        x_det[y] = regime == Regime::StaticCS
                       ? optimize_deterministic(set[y].series, book, in.optimizer)
                             .decision.level
                       : optimize_deterministic(set[y].series, book, ctx->schedules[y],
                                                ctx->stacks[y], in.optimizer)
                             .decision.level;
      }
      for (std::size_t y = 0; y < years; ++y) {
        const auto c_stoch = year_cost(y, x_stoch);
        const auto c_det = year_cost(y, x_det[y]);
        detail::check_dominance(set, regime, c_det, c_stoch, y);
        if (wants(PolicyKind::Deterministic)) {
          out.levels.push_back({i, y, regime, "det", x_det[y]});
          out.costs.push_back({i, y, regime, "det", c_det});
        }
        if (wants(PolicyKind::Stochastic)) {
          out.levels.push_back({i, y, regime, "stoch", x_stoch});
          out.costs.push_back({i, y, regime, "stoch", c_stoch});
        }
        if (wants(PolicyKind::Reactive) && y > 0) {
          out.levels.push_back({i, y, regime, "reactive", x_det[y - 1]});
          out.costs.push_back({i, y, regime, "reactive", year_cost(y, x_det[y - 1])});
        }
      }
    }
  });
  return result;
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

inline std::string n(double v) { return format_number(v); }

/// Mean annual welfare cost per consumer for one (regime, policy), together
/// with the energy baseline over the same years.
inline std::pair<std::vector<double>, std::vector<double>> mean_costs(
    const StudyResult& r, Regime regime, const std::string& policy) {
  std::vector<double> a(r.consumers.size(), 0.0), b(r.consumers.size(), 0.0);
  for (std::size_t i = 0; i < r.consumers.size(); ++i) {
    std::vector<bool> covered(r.years.size(), false);
    std::size_t count = 0;
    for (const auto& c : r.consumers[i].costs) {
      if (c.regime == regime && c.policy == policy) {
        a[i] += c.breakdown.total_welfare;
        covered[c.year_index] = true;
        ++count;
      }
    }
    for (const auto& c : r.consumers[i].costs) {
      if (c.regime == Regime::EnergyOnly && covered[c.year_index]) {
        b[i] += c.breakdown.total_welfare;
      }
    }
    if (count > 0) {
      a[i] /= double(count);
      b[i] /= double(count);
    }
  }
  return {a, b};
}

}  // namespace detail

/// Writes every CSV of a finished study into `dir` and returns the file
/// names, in writing order.
inline std::vector<std::string> write_study_outputs(const StudyResult& r,
                                                    const std::filesystem::path& dir) {
  using detail::n;
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto open = [&](const std::string& name) {
    files.push_back(name);
    return detail::open_output(dir / name);
  };

  {
    auto out = open("fullloadhours.csv");
    out << "consumer_id,year,full_load_hours,load_factor\n";
    for (std::size_t i = 0; i < r.consumers.size(); ++i) {
      for (std::size_t y = 0; y < r.years.size(); ++y) {
        out << r.consumer_ids[i] << ',' << r.years[y] << ','
            << n(r.consumers[i].full_load_hours[y]) << ','
            << n(r.consumers[i].load_factor[y]) << '\n';
      }
    }
  }
  {
    auto out = open("fullloadhours_boxplot.csv");
    out << "# " << kWhiskerConvention << '\n';
    out << "year,median,q25,q75,whisker_lo,whisker_hi,outlier_count,outliers\n";
    for (std::size_t y = 0; y < r.years.size(); ++y) {
      std::vector<double> values;
      for (const auto& c : r.consumers) values.push_back(c.full_load_hours[y]);
      const auto s = boxplot_stats(values);
      out << r.years[y] << ',' << n(s.median) << ',' << n(s.q25) << ',' << n(s.q75)
          << ',' << n(s.whisker_lo) << ',' << n(s.whisker_hi) << ','
          << s.outliers.size() << ',';
      for (std::size_t k = 0; k < s.outliers.size(); ++k) {
        out << (k ? ";" : "") << n(s.outliers[k]);
      }
      out << '\n';
    }
  }
  {
    auto out = open("subscription_levels.csv");
    out << "consumer_id,regime,policy,year,level_kw\n";
    for (const auto& c : r.consumers) {
      for (const auto& l : c.levels) {
        out << r.consumer_ids[l.consumer] << ',' << regime_name(l.regime) << ','
            << l.policy << ',' << r.years[l.year_index] << ',' << n(l.level) << '\n';
      }
    }
  }
  std::vector<CostRecord> all_costs;
  {
    auto out = open("cost_breakdowns.csv");
    out << "consumer_id,regime,policy,year,fixed,capacity,energy_below,excess,"
           "discomfort,total_monetary,total_welfare\n";
    for (const auto& c : r.consumers) {
      for (const auto& rec : c.costs) {
        const auto& b = rec.breakdown;
        out << r.consumer_ids[rec.consumer] << ',' << regime_name(rec.regime) << ','
            << rec.policy << ',' << r.years[rec.year_index] << ',' << n(b.fixed)
            << ',' << n(b.capacity) << ',' << n(b.energy_below) << ','
            << n(b.excess) << ',' << n(b.discomfort) << ',' << n(b.total_monetary)
            << ',' << n(b.total_welfare) << '\n';
        all_costs.push_back(rec);
      }
    }
  }
  {
    auto out = open("aggregate_revenue.csv");
    out << "year,regime,policy,consumers,monetary_eur,discomfort_eur,welfare_eur\n";
    for (const auto& row : aggregate_revenue_table(all_costs)) {
      out << r.years[row.year_index] << ',' << regime_name(row.regime) << ','
          << row.policy << ',' << row.consumers << ',' << n(row.monetary) << ','
          << n(row.discomfort) << ',' << n(row.welfare) << '\n';
    }
  }

  auto has = [&](PolicyKind p) {
    return std::find(r.policies.begin(), r.policies.end(), p) != r.policies.end();
  };
  auto write_curve = [&](const std::string& name, const std::vector<double>& a,
                         const std::vector<double>& b) {
    auto out = open(name);
    out << "rank,consumer_id,cost_eur,reference_cost_eur,ratio\n";
    for (const auto& p : relative_cost_curve(a, b)) {
      out << p.rank << ',' << r.consumer_ids[p.consumer] << ',' << n(a[p.consumer])
          << ',' << n(b[p.consumer]) << ',' << n(p.ratio) << '\n';
    }
  };
  struct ScatterSeries {
    Regime regime;
    std::vector<double> ratios;
  };
  std::vector<ScatterSeries> scatter;
  for (Regime regime : r.regimes) {
    for (PolicyKind p : r.policies) {
      if (p == PolicyKind::Reactive && r.years.size() < 2) continue;
      const std::string policy = policy_kind_name(p);
      auto [a, b] = detail::mean_costs(r, regime, policy);
      write_curve(std::string("relative_cost_") + regime_name(regime) + "_" + policy +
                      "_vs_energy.csv",
                  a, b);
      if (p == PolicyKind::Stochastic) {
        std::vector<double> ratios;
        for (std::size_t i = 0; i < a.size(); ++i) ratios.push_back(a[i] / b[i]);
        scatter.push_back({regime, std::move(ratios)});
      }
    }
    if (has(PolicyKind::Deterministic) && has(PolicyKind::Stochastic)) {
      auto det = detail::mean_costs(r, regime, "det").first;
      auto stoch = detail::mean_costs(r, regime, "stoch").first;
      write_curve(std::string("relative_cost_") + regime_name(regime) +
                      "_det_vs_stoch.csv",
                  det, stoch);
    }
  }
  if (!scatter.empty()) {
    std::vector<double> lf(r.consumers.size());
    for (std::size_t i = 0; i < lf.size(); ++i) {
      const auto& v = r.consumers[i].load_factor;
      lf[i] = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    }
    {
      auto out = open("load_factor_scatter.csv");
      out << "consumer_id,regime,load_factor,stoch_cost_ratio_vs_energy\n";
      for (const auto& s : scatter) {
        for (std::size_t i = 0; i < lf.size(); ++i) {
          out << r.consumer_ids[i] << ',' << regime_name(s.regime) << ',' << n(lf[i])
              << ',' << n(s.ratios[i]) << '\n';
        }
      }
    }
    auto out = open("load_factor_regression.csv");
    out << "# ordinary least squares: cost_ratio = slope * load_factor + intercept\n";
    out << "regime,slope,intercept,n\n";
    for (const auto& s : scatter) {
      out << regime_name(s.regime) << ',';
      try {
        const auto fit = ols_fit(lf, s.ratios);
        out << n(fit.slope) << ',' << n(fit.intercept) << ',' << fit.n << '\n';
      } catch (const DomainError&) {
        out << ",," << lf.size() << '\n';  // fewer than two distinct load factors
      }
    }
  }

  if (!r.schedules.empty()) {
    {
      auto out = open("activations.csv");
      write_activations_csv(out, r.schedules);
    }
    auto out = open("activation_summary.csv");
    out << "year,hours,share_percent\n";
    const auto summary = activation_summary(r.schedules);
    for (const auto& row : summary.rows) {
      out << row.year_label << ',' << row.hours << ',' << n(row.share_percent) << '\n';
    }
  }
  return files;
}

}  // namespace cstariff
