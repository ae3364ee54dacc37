#pragma once

#include <vector>

#include "cstariff/ingest.hpp"
#include "cstariff/study.hpp"

namespace cstariff::fixtures {

/// Winter-peaking synthetic population used across integration tests.
inline SyntheticPopulationSpec reference_spec(std::size_t consumers = 84,
                                              std::size_t years = 6) {
  SyntheticPopulationSpec s;
  s.consumer_count = consumers;
  const std::vector<int> all_years{2013, 2014, 2015, 2016, 2017, 2018};
  const std::vector<double> factors{1.0, 1.03, 1.1, 0.98, 1.01, 1.05};
  s.years.assign(all_years.begin(), all_years.begin() + long(years));
  s.cold_year_factor.assign(factors.begin(), factors.begin() + long(years));
  s.rng_seed = 2021;
  s.base_load_kw = 1.6;
  s.seasonal_amplitude = 1.0;
  s.daily_amplitude = 0.5;
  s.spike_rate = 40;
  s.spike_magnitude = 2.5;
  s.noise_kw = 0.3;
  s.heterogeneity = 0.5;
  return s;
}

/// Threshold at a given fraction of the population's all-year aggregate peak.
inline double threshold_at(std::span<const ScenarioSet> population, double fraction) {
  double peak = 0.0;
  for (std::size_t y = 0; y < population.front().size(); ++y) {
    std::vector<const HourlyLoadSeries*> members;
    for (const auto& set : population) members.push_back(&set[y].series);
    for (double v : aggregate_load(std::span<const HourlyLoadSeries* const>(members))) {
      peak = std::max(peak, v);
    }
  }
  return fraction * peak;
}

inline std::vector<DynamicContext> contexts_for(std::span<const ScenarioSet> population,
                                                double threshold_kw, int segments = 10) {
  StudyInputs in;
  in.threshold_kw = threshold_kw;
  const auto years = detail::common_years(population);
  const auto schedules = detail::study_schedules(population, years, in);
  std::vector<DynamicContext> out;
  for (const auto& set : population) {
    out.push_back(detail::consumer_context(set, schedules, {5.0, 8.0}, segments));
  }
  return out;
}

}  // namespace cstariff::fixtures
