#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cstariff/data_model.hpp"
#include "cstariff/errors.hpp"
#include "cstariff/format.hpp"

namespace cstariff {

inline constexpr std::string_view kLoadCsvHeader = "consumer_id,timestamp,load_kwh";

// ---------------------------------------------------------------------------
// Calendar helpers. Year labels of metered data are calendar years.
// ---------------------------------------------------------------------------

inline std::size_t hours_in_year(int year) {
  return std::chrono::year(year).is_leap() ? kHoursPerLeapYear : kHoursPerYear;
}

inline std::optional<int> year_from_label(std::string_view label) {
  int year = 0;
  const auto [end, ec] =
      std::from_chars(label.data(), label.data() + label.size(), year);
  if (ec != std::errc{} || end != label.data() + label.size() || year < 1 ||
      year > 9999) {
    return std::nullopt;
  }
  return year;
}

/// `YYYY-MM-DDTHH:00` for hour `hour_index` of `year`.
inline std::string timestamp_for(int year, std::size_t hour_index) {
  using namespace std::chrono;
  const sys_days day =
      sys_days(std::chrono::year(year) / January / 1) + days(hour_index / 24);
  const year_month_day ymd(day);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02zu:00", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), hour_index % 24);
  return buf;
}

struct HourStamp {
  int year;
  std::size_t hour_index;
};

/// Parses `YYYY-MM-DDTHH:MM` (minutes must be 00).
inline std::optional<HourStamp> parse_timestamp(std::string_view ts) {
  if (ts.size() != 16 || ts[4] != '-' || ts[7] != '-' || ts[10] != 'T' ||
      ts[13] != ':') {
    return std::nullopt;
  }
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (ts[i] < '0' || ts[i] > '9') return std::nullopt;
      v = v * 10 + (ts[i] - '0');
    }
    return v;
  };
  const auto y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2),
             mi = num(14, 2);
  if (!y || !mo || !d || !h || !mi || *h > 23 || *mi != 0) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year(*y), month(unsigned(*mo)),
                           day(unsigned(*d))};
  if (!ymd.ok()) return std::nullopt;
  const auto day_index =
      (sys_days(ymd) - sys_days(ymd.year() / January / 1)).count();
  return HourStamp{*y, std::size_t(day_index) * 24 + std::size_t(*h)};
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Reads `consumer_id,timestamp,load_kwh` rows into one series per consumer
/// and calendar year. Consumers keep their order of first appearance; years
/// are ascending. Every hour of each year must be present exactly once.
inline std::vector<HourlyLoadSeries> parse_load_csv(std::istream& in) {
  struct Pending {
    std::vector<double> loads;
    std::vector<bool> seen;
    std::size_t filled = 0;
  };
  std::vector<std::string> consumer_order;
  std::unordered_map<std::string, std::map<int, Pending>> pending;

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw MalformedRow(1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kLoadCsvHeader) {
    throw MalformedRow(1, "expected header '" + std::string(kLoadCsvHeader) + "'");
  }

  std::string current_id;
  std::map<int, Pending>* current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string_view row(line);
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
      throw MalformedRow(line_no, "expected 3 comma-separated fields");
    }
    const auto id = row.substr(0, c1);
    const auto ts = row.substr(c1 + 1, c2 - c1 - 1);
    const auto value_text = row.substr(c2 + 1);
    if (id.empty()) throw MalformedRow(line_no, "empty consumer_id");
    const auto stamp = parse_timestamp(ts);
    if (!stamp) {
      throw MalformedRow(line_no, "bad timestamp '" + std::string(ts) + "'");
    }
    const auto value = parse_number(value_text);
    if (!value) {
      throw MalformedRow(line_no, "bad load value '" + std::string(value_text) + "'");
    }
    if (*value < 0.0) {
      throw NegativeLoad("line " + std::to_string(line_no) + ": negative load " +
                         std::string(value_text) + " for '" + std::string(id) +
                         "' at " + std::string(ts));
    }
    if (current == nullptr || id != current_id) {
      current_id.assign(id);
      auto [it, inserted] = pending.try_emplace(current_id);
      if (inserted) consumer_order.push_back(current_id);
      current = &it->second;
    }
    auto [yit, new_year] = current->try_emplace(stamp->year);
    Pending& p = yit->second;
    if (new_year) {
      const auto n = hours_in_year(stamp->year);
      p.loads.assign(n, 0.0);
      p.seen.assign(n, false);
    }
    if (p.seen[stamp->hour_index]) {
      throw MalformedRow(line_no, "duplicate hour " + std::string(ts) +
                                      " for '" + std::string(id) + "'");
    }
    p.seen[stamp->hour_index] = true;
    p.loads[stamp->hour_index] = *value;
    ++p.filled;
  }

  std::vector<HourlyLoadSeries> out;
  for (const auto& id : consumer_order) {
    for (auto& [year, p] : pending[id]) {
      if (p.filled != p.loads.size()) {
        std::size_t t = 0;
        while (p.seen[t]) ++t;
        throw MissingHours("missing hour " + timestamp_for(year, t) + " for '" +
                           id + "' (" + std::to_string(p.loads.size() - p.filled) +
                           " hours missing in " + std::to_string(year) + ")");
      }
      out.push_back(HourlyLoadSeries::full_year(id, std::to_string(year),
                                                std::move(p.loads)));
    }
  }
  return out;
}

inline std::vector<HourlyLoadSeries> parse_load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open load file '" + path + "'");
  return parse_load_csv(in);
}

inline void write_load_csv(std::ostream& out,
                           std::span<const HourlyLoadSeries> series) {
  out << kLoadCsvHeader << '\n';
  for (const auto& s : series) {
    const auto year = year_from_label(s.year_label());
    if (!year || hours_in_year(*year) != s.hours_count()) {
      throw DomainError("series '" + s.consumer_id() + "'/'" + s.year_label() +
                        "' is not a full calendar year");
    }
    for (std::size_t t = 0; t < s.hours_count(); ++t) {
      out << s.consumer_id() << ',' << timestamp_for(*year, t) << ','
          << format_number(s[t]) << '\n';
    }
  }
}

/// Groups series by consumer (first-appearance order) into equiprobable
/// scenario sets.
inline std::vector<ScenarioSet> group_scenarios(
    std::vector<HourlyLoadSeries> series) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<HourlyLoadSeries>> by_consumer;
  for (auto& s : series) {
    auto [it, inserted] = by_consumer.try_emplace(s.consumer_id());
    if (inserted) order.push_back(s.consumer_id());
    it->second.push_back(std::move(s));
  }
  std::vector<ScenarioSet> sets;
  sets.reserve(order.size());
  for (const auto& id : order) {
    sets.push_back(ScenarioSet::equiprobable(std::move(by_consumer[id])));
  }
  return sets;
}

// ---------------------------------------------------------------------------
// Synthetic populations
// ---------------------------------------------------------------------------

struct SyntheticPopulationSpec {
  std::size_t consumer_count = 1;
  std::vector<int> years;
  std::uint64_t rng_seed = 0;
  double base_load_kw = 0.0;
  double seasonal_amplitude = 0.0;
  double daily_amplitude = 0.0;
  double spike_rate = 0.0;       // expected spikes per year
  double spike_magnitude = 0.0;  // kW
  std::vector<double> cold_year_factor;
  // Optional knobs, zero by default.
  double noise_kw = 0.0;       // half-width of uniform hourly noise
  double heterogeneity = 0.0;  // per-consumer multiplier spread in [0, 1)

  void validate() const {
    if (consumer_count < 1) throw InputError("consumer_count must be >= 1");
    if (years.empty()) throw InputError("years must not be empty");
    for (std::size_t i = 0; i < years.size(); ++i) {
      if (years[i] < 1 || years[i] > 9999) {
        throw InputError("years must be calendar years");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (years[j] == years[i]) throw InputError("years must be distinct");
      }
    }
    if (cold_year_factor.size() != years.size()) {
      throw InputError("cold_year_factor needs one entry per year");
    }
    auto non_negative = [](double v, const char* field) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InputError(std::string(field) + " must be finite and >= 0");
      }
    };
    non_negative(base_load_kw, "base_load_kw");
    non_negative(seasonal_amplitude, "seasonal_amplitude");
    non_negative(daily_amplitude, "daily_amplitude");
    non_negative(spike_rate, "spike_rate");
    non_negative(spike_magnitude, "spike_magnitude");
    non_negative(noise_kw, "noise_kw");
    for (double f : cold_year_factor) non_negative(f, "cold_year_factor");
    if (!(heterogeneity >= 0.0 && heterogeneity < 1.0)) {
      throw InputError("heterogeneity must lie in [0, 1)");
    }
  }
};

inline void to_json(nlohmann::json& j, const SyntheticPopulationSpec& s) {
  j = {{"consumer_count", s.consumer_count},
       {"years", s.years},
       {"rng_seed", s.rng_seed},
       {"base_load_kw", s.base_load_kw},
       {"seasonal_amplitude", s.seasonal_amplitude},
       {"daily_amplitude", s.daily_amplitude},
       {"spike_rate", s.spike_rate},
       {"spike_magnitude", s.spike_magnitude},
       {"cold_year_factor", s.cold_year_factor},
       {"noise_kw", s.noise_kw},
       {"heterogeneity", s.heterogeneity}};
}

/// Reads a spec object; a missing or mistyped field is reported by name.
inline SyntheticPopulationSpec population_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("population spec must be a JSON object");
  SyntheticPopulationSpec s;
  auto field = [&](const char* name, auto& target, bool required) {
    const auto it = j.find(name);
    if (it == j.end()) {
      if (required) throw InputError(std::string("missing field '") + name + "'");
      return;
    }
    try {
      it->get_to(target);
    } catch (const nlohmann::json::exception&) {
      throw InputError(std::string("field '") + name + "' has the wrong type");
    }
  };
  field("consumer_count", s.consumer_count, true);
  field("years", s.years, true);
  field("rng_seed", s.rng_seed, true);
  field("base_load_kw", s.base_load_kw, true);
  field("seasonal_amplitude", s.seasonal_amplitude, true);
  field("daily_amplitude", s.daily_amplitude, true);
  field("spike_rate", s.spike_rate, true);
  field("spike_magnitude", s.spike_magnitude, true);
  field("cold_year_factor", s.cold_year_factor, true);
  field("noise_kw", s.noise_kw, false);
  field("heterogeneity", s.heterogeneity, false);
  s.validate();
  return s;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// mt19937_64 is fully specified by the standard; the distributions are
/// not, so the transforms to [0,1) and exponential are spelled out here.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : engine_(splitmix64(seed ^ splitmix64(stream + 1))) {}

  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace detail

/// Deterministic synthetic consumers. Each consumer draws its behaviour
/// (scale multipliers, evening-peak offset, noise and spike events) once
/// from its own stream; weather years reuse it and differ through the
/// cold-year factor on the heating term, which peaks at New Year.
inline std::vector<ScenarioSet> generate_population(
    const SyntheticPopulationSpec& spec) {
  spec.validate();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<ScenarioSet> population;
  population.reserve(spec.consumer_count);
  for (std::size_t i = 0; i < spec.consumer_count; ++i) {
    detail::StreamRng rng(spec.rng_seed, i);
    const double h = spec.heterogeneity;
    const double base = spec.base_load_kw * (1.0 + h * rng.symmetric());
    const double seasonal = spec.seasonal_amplitude * (1.0 + h * rng.symmetric());
    const double daily = spec.daily_amplitude * (1.0 + h * rng.symmetric());
    const double spike_scale = spec.spike_magnitude * (1.0 + h * rng.symmetric());
    const double peak_hour = 18.0 + 2.0 * h * rng.symmetric();

    std::vector<double> behaviour(kHoursPerLeapYear, 0.0);
    if (spec.noise_kw > 0.0) {
      for (double& v : behaviour) v = spec.noise_kw * rng.symmetric();
    }
    if (spec.spike_rate > 0.0 && spec.spike_magnitude > 0.0) {
      const double rate = spec.spike_rate / double(kHoursPerYear);
      for (double t = rng.exponential(rate); t < double(kHoursPerLeapYear);
           t += rng.exponential(rate)) {
        const double magnitude = spike_scale * (0.5 + rng.uniform());
        const auto duration = 1 + std::size_t(3.0 * rng.uniform());
        for (std::size_t k = std::size_t(t);
             k < std::min(kHoursPerLeapYear, std::size_t(t) + duration); ++k) {
          behaviour[k] += magnitude;
        }
      }
    }

    const std::string id = "C" + std::to_string(i + 1);
    std::vector<HourlyLoadSeries> years;
    years.reserve(spec.years.size());
    for (std::size_t y = 0; y < spec.years.size(); ++y) {
      const std::size_t n = hours_in_year(spec.years[y]);
      const double heat = seasonal * spec.cold_year_factor[y];
      std::vector<double> loads(n);
      for (std::size_t t = 0; t < n; ++t) {
        double v = base;
        if (heat != 0.0) v += heat * std::cos(two_pi * double(t) / double(n));
        if (daily != 0.0) {
          v += daily * std::cos(two_pi * (double(t % 24) - peak_hour) / 24.0);
        }
        v += behaviour[t];
        loads[t] = std::max(0.0, v);
      }
      years.push_back(HourlyLoadSeries::full_year(
          id, std::to_string(spec.years[y]), std::move(loads)));
    }
    population.push_back(ScenarioSet::equiprobable(std::move(years)));
  }
  return population;
}

/// All series of a population, consumer-major, in scenario order.
inline std::vector<HourlyLoadSeries> flatten(std::span<const ScenarioSet> population) {
  std::vector<HourlyLoadSeries> out;
  for (const auto& set : population) {
    for (const auto& sc : set.scenarios()) out.push_back(sc.series);
  }
  return out;
}

}  // namespace cstariff
