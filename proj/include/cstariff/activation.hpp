#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cstariff/data_model.hpp"
#include "cstariff/errors.hpp"

namespace cstariff {

/// Hours of one scenario year during which load limiting is active.
struct ActivationSchedule {
  std::string year_label;
  std::vector<std::size_t> active_hours;  // sorted, unique
  double threshold_kw = 0.0;

  bool is_active(std::size_t hour) const {
    return std::binary_search(active_hours.begin(), active_hours.end(), hour);
  }

  friend bool operator==(const ActivationSchedule&,
                         const ActivationSchedule&) = default;
};

/// Aggregate load per hour over a population for one year.
inline std::vector<double> aggregate_load(
    std::span<const HourlyLoadSeries* const> population) {
  if (population.empty()) throw DomainError("empty population");
  const auto& first = *population.front();
  std::vector<double> total(first.hours_count(), 0.0);
  for (const HourlyLoadSeries* s : population) {
    if (s->year_label() != first.year_label() ||
        s->hours_count() != first.hours_count()) {
      throw ScenarioMismatch("population mixes years '" + first.year_label() +
                             "' and '" + s->year_label() + "'");
    }
    const auto loads = s->loads();
    for (std::size_t t = 0; t < total.size(); ++t) total[t] += loads[t];
  }
  return total;
}

/// Hours where the population's aggregate load strictly exceeds the
/// threshold.
inline ActivationSchedule derive_activations(
    std::span<const HourlyLoadSeries* const> population, double threshold_kw) {
  if (!(threshold_kw > 0.0)) {
    throw DomainError("activation threshold must be positive");
  }
  const auto total = aggregate_load(population);
  ActivationSchedule schedule{population.front()->year_label(), {},
                              threshold_kw};
  for (std::size_t t = 0; t < total.size(); ++t) {
    if (total[t] > threshold_kw) schedule.active_hours.push_back(t);
  }
  return schedule;
}

inline ActivationSchedule derive_activations(
    std::span<const HourlyLoadSeries> population, double threshold_kw) {
  std::vector<const HourlyLoadSeries*> ptrs;
  ptrs.reserve(population.size());
  for (const auto& s : population) ptrs.push_back(&s);
  return derive_activations(std::span<const HourlyLoadSeries* const>(ptrs),
                            threshold_kw);
}

struct ActivationSummaryRow {
  std::string year_label;
  std::size_t hours;
  double share_percent;
};

struct ActivationSummary {
  std::vector<ActivationSummaryRow> rows;
  std::size_t total_hours = 0;
};

/// Per-year activation counts and their share of the total. No rows are
/// reported when nothing was activated.
inline ActivationSummary activation_summary(
    std::span<const ActivationSchedule> schedules) {
  ActivationSummary summary;
  for (const auto& s : schedules) summary.total_hours += s.active_hours.size();
  if (summary.total_hours == 0) return summary;
  for (const auto& s : schedules) {
    summary.rows.push_back(
        {s.year_label, s.active_hours.size(),
         100.0 * double(s.active_hours.size()) / double(summary.total_hours)});
  }
  return summary;
}

inline void write_activations_csv(std::ostream& out,
                                  std::span<const ActivationSchedule> schedules) {
  out << "year_label,hour_index\n";
  for (const auto& s : schedules) {
    for (std::size_t h : s.active_hours) out << s.year_label << ',' << h << '\n';
  }
}

/// Reads `year_label,hour_index` rows. Years without rows get no schedule
/// here; callers supply empty schedules for them.
inline std::vector<ActivationSchedule> read_activations_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw MalformedRow(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "year_label,hour_index") {
    throw MalformedRow(1, "expected header 'year_label,hour_index'");
  }
  std::map<std::string, std::vector<std::size_t>> by_year;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0) {
      throw MalformedRow(line_no, "expected 'year_label,hour_index'");
    }
    const std::string year = line.substr(0, comma);
    const std::string hour = line.substr(comma + 1);
    char* end = nullptr;
    const unsigned long long h = std::strtoull(hour.c_str(), &end, 10);
    if (hour.empty() || *end != '\0' || hour.front() == '-') {
      throw MalformedRow(line_no, "bad hour index '" + hour + "'");
    }
    auto [it, inserted] = by_year.try_emplace(year);
    if (inserted) order.push_back(year);
    it->second.push_back(std::size_t(h));
  }
  std::vector<ActivationSchedule> out;
  for (const auto& year : order) {
    auto hours = by_year[year];
    std::sort(hours.begin(), hours.end());
    hours.erase(std::unique(hours.begin(), hours.end()), hours.end());
    out.push_back({year, std::move(hours), 0.0});
  }
  return out;
}

inline std::vector<ActivationSchedule> read_activations_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open activation file '" + path + "'");
  return read_activations_csv(in);
}

}  // namespace cstariff
