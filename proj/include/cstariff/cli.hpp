#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cstariff/calibration.hpp"
#include "cstariff/errors.hpp"
#include "cstariff/ingest.hpp"
#include "cstariff/study.hpp"
#include "cstariff/tariff_config.hpp"

namespace cstariff::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kCalibrationFailure = 2,
  kInternalError = 3,
};

inline std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

inline std::vector<ScenarioSet> load_population(const std::string& path) {
  return group_scenarios(parse_load_csv(path));
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string spec_file;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

inline int run_generate(const GenerateArgs& a) {
  auto spec = population_spec_from_json(read_json_file(a.spec_file));
  if (a.seed) spec.rng_seed = *a.seed;
  const auto population = generate_population(spec);
  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "loads.csv", std::ios::binary);
    if (!out) throw InputError("cannot write '" + (dir / "loads.csv").string() + "'");
    write_load_csv(out, flatten(population));
  }
  write_json_file(dir / "population_spec.json", nlohmann::json(spec));
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct CalibrateArgs {
  std::string loads;
  std::string tariff;
  std::string regime;
  std::string out;
  std::optional<double> threshold_kw;
  std::optional<std::string> activations;
  int vcl_segments = kDefaultVclSegments;
  double tolerance = 1e-4;
  std::optional<double> min_level;
  unsigned jobs = default_jobs();
};

inline int run_calibrate(const CalibrateArgs& a) {
  const Regime regime = parse_regime(a.regime);
  if (regime == Regime::EnergyOnly) {
    throw InputError("the energy tariff has no capacity price to calibrate");
  }
  if (!(a.tolerance > 0.0)) throw InputError("--tolerance must be positive");
  const TariffConfig cfg = read_tariff_config(a.tariff);
  const auto population = load_population(a.loads);
  const TariffBook& book = cfg.book(regime);
  const double reference = energy_tariff_revenue(population, cfg.book(Regime::EnergyOnly));

  std::vector<DynamicContext> contexts;
  std::vector<ActivationSchedule> schedules;
  if (regime == Regime::DynamicCS) {
    StudyInputs in;
    in.threshold_kw = a.threshold_kw;
    if (a.activations) in.activations = read_activations_csv(*a.activations);
    const auto years = detail::common_years(population);
    schedules = detail::study_schedules(population, years, in);
    for (const auto& set : population) {
      contexts.push_back(detail::consumer_context(set, schedules, cfg.vcl, a.vcl_segments));
    }
  }
  CalibrationOptions opts;
  opts.tolerance = a.tolerance;
  opts.jobs = a.jobs;
  opts.optimizer.min_level = a.min_level;
  const auto result = calibrate_capacity_price(population, book, reference, contexts, opts);

  // A complete config with the calibrated section, usable as --tariff.
  TariffConfig calibrated = cfg;
  calibrated.set_book(result.book);
  const nlohmann::json tariff = tariff_config_to_json(calibrated);
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& s : result.trace) trace.push_back({s.capacity_price, s.aggregate_cost});
  nlohmann::json j = {
      {"regime", regime_name(regime)},
      {"tariff", tariff},
      {"diagnostics",
       {{"reference_revenue_eur", result.reference_revenue},
        {"aggregate_cost_eur", result.aggregate_cost},
        {"relative_gap", result.relative_gap},
        {"tolerance", a.tolerance},
        {"iterations", result.iterations},
        {"consumers", population.size()},
        {"trace", trace}}}};
  write_json_file(a.out, j);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct StudyArgs {
  std::string loads;
  std::string tariff;
  std::vector<std::string> regimes;
  std::vector<std::string> policies;
  std::optional<double> threshold_kw;
  std::optional<std::string> activations;
  int vcl_segments = kDefaultVclSegments;
  std::uint64_t seed = 0;
  bool calibrate = false;
  double tolerance = 1e-4;
  std::optional<double> min_level;
  std::string out;
  std::optional<std::string> manifest;
  unsigned jobs = default_jobs();
};

/// Everything needed to rerun a study; excludes the output directory and
/// the degree of parallelism, which do not affect results.
struct StudyManifest {
  std::string loads_path;
  std::string loads_fnv1a64;
  nlohmann::json tariff;
  std::vector<std::string> regimes;
  std::vector<std::string> policies;
  std::optional<double> threshold_kw;
  std::optional<std::string> activations_path;
  std::optional<std::string> activations_fnv1a64;
  int vcl_segments = kDefaultVclSegments;
  std::uint64_t seed = 0;
  bool calibrate = false;
  double tolerance = 1e-4;
  std::optional<double> min_level;

  nlohmann::json to_json(const std::vector<std::string>& outputs) const {
    nlohmann::json j = {
        {"format", "cstariff-study-manifest"},
        {"version", 1},
        {"loads", {{"path", loads_path}, {"fnv1a64", loads_fnv1a64}}},
        {"tariff", tariff},
        {"regimes", regimes},
        {"policies", policies},
        {"threshold_kw", threshold_kw ? nlohmann::json(*threshold_kw) : nlohmann::json()},
        {"vcl_segments", vcl_segments},
        {"seed", seed},
        {"calibrate", calibrate},
        {"calibration_tolerance", tolerance},
        {"min_level_kw", min_level ? nlohmann::json(*min_level) : nlohmann::json()},
        {"whisker_convention", kWhiskerConvention},
        {"outputs", outputs}};
    j["activations"] = activations_path
                           ? nlohmann::json{{"path", *activations_path},
                                            {"fnv1a64", *activations_fnv1a64}}
                           : nlohmann::json();
    return j;
  }

  static StudyManifest from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "cstariff-study-manifest") {
      throw InputError("not a study manifest");
    }
    try {
      StudyManifest m;
      m.loads_path = j.at("loads").at("path").get<std::string>();
      m.loads_fnv1a64 = j.at("loads").at("fnv1a64").get<std::string>();
      m.tariff = j.at("tariff");
      m.regimes = j.at("regimes").get<std::vector<std::string>>();
      m.policies = j.at("policies").get<std::vector<std::string>>();
      if (!j.at("threshold_kw").is_null()) m.threshold_kw = j.at("threshold_kw").get<double>();
      if (!j.at("activations").is_null()) {
        m.activations_path = j.at("activations").at("path").get<std::string>();
        m.activations_fnv1a64 = j.at("activations").at("fnv1a64").get<std::string>();
      }
      m.vcl_segments = j.at("vcl_segments").get<int>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.calibrate = j.at("calibrate").get<bool>();
      m.tolerance = j.at("calibration_tolerance").get<double>();
      if (!j.at("min_level_kw").is_null()) m.min_level = j.at("min_level_kw").get<double>();
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("incomplete study manifest: ") + e.what());
    }
  }
};

inline nlohmann::json calibration_json(const StudyResult& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [regime, cal] : r.calibrations) {
    j[regime_name(regime)] = {{"capacity_eur_per_kw_year", cal.book.capacity_price},
                              {"reference_revenue_eur", cal.reference_revenue},
                              {"aggregate_cost_eur", cal.aggregate_cost},
                              {"relative_gap", cal.relative_gap},
                              {"iterations", cal.iterations}};
  }
  return j;
}

inline int run_study_from_manifest(const StudyManifest& m, const std::string& out_dir,
                                   unsigned jobs) {
  if (fnv1a64_file(m.loads_path) != m.loads_fnv1a64) {
    throw InputError("load file '" + m.loads_path + "' changed since the manifest was written");
  }
  if (m.activations_path && fnv1a64_file(*m.activations_path) != *m.activations_fnv1a64) {
    throw InputError("activation file changed since the manifest was written");
  }
  if (m.policies.empty()) throw InputError("no policies requested (--policy)");
  if (m.vcl_segments < 1) throw InputError("--vcl-segments must be >= 1");
  StudyInputs in;
  in.tariffs = tariff_config_from_json(m.tariff);
  for (const auto& r : m.regimes) in.regimes.push_back(parse_regime(r));
  for (const auto& p : m.policies) in.policies.push_back(parse_policy_kind(p));
  in.threshold_kw = m.threshold_kw;
  if (m.activations_path) in.activations = read_activations_csv(*m.activations_path);
  in.vcl_segments = m.vcl_segments;
  in.calibrate = m.calibrate;
  in.calibration_tolerance = m.tolerance;
  in.optimizer.min_level = m.min_level;
  in.jobs = jobs;
  in.population = load_population(m.loads_path);

  const auto result = run_study(in);
  auto outputs = write_study_outputs(result, out_dir);
  if (!result.calibrations.empty()) {
    write_json_file(std::filesystem::path(out_dir) / "calibration.json", calibration_json(result));
    outputs.push_back("calibration.json");
  }
  outputs.push_back("study.json");
  write_json_file(std::filesystem::path(out_dir) / "study.json", m.to_json(outputs));
  return kSuccess;
}

inline int run_study(const StudyArgs& a) {
  if (a.manifest) {
    return run_study_from_manifest(StudyManifest::from_json(read_json_file(*a.manifest)), a.out,
                                   a.jobs);
  }
  if (a.loads.empty() || a.tariff.empty()) {
    throw InputError("study needs --loads and --tariff (or --manifest)");
  }
  StudyManifest m;
  m.loads_path = std::filesystem::absolute(a.loads).lexically_normal().string();
  m.loads_fnv1a64 = fnv1a64_file(m.loads_path);
  m.tariff = tariff_config_to_json(read_tariff_config(a.tariff));
  m.regimes = a.regimes;
  if (m.regimes.empty()) {
    const auto cfg = tariff_config_from_json(m.tariff);
    if (cfg.static_cs) m.regimes.push_back("static");
    if (cfg.dynamic_cs) m.regimes.push_back("dynamic");
  }
  m.policies = a.policies;
  m.threshold_kw = a.threshold_kw;
  if (a.activations) {
    m.activations_path = std::filesystem::absolute(*a.activations).lexically_normal().string();
    m.activations_fnv1a64 = fnv1a64_file(*m.activations_path);
  }
  m.vcl_segments = a.vcl_segments;
  m.seed = a.seed;
  m.calibrate = a.calibrate;
  m.tolerance = a.tolerance;
  m.min_level = a.min_level;
  return run_study_from_manifest(m, a.out, a.jobs);
}

// ---------------------------------------------------------------------------

/// Entry point of the `cstariff` tool. Never throws; returns the exit code.
inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Capacity subscription grid tariff studies"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic load population");
  generate->add_option("spec-file,--spec", gen.spec_file, "population spec JSON")->required();
  generate->add_option("out-dir,--out", gen.out_dir, "output directory")->required();
  generate->add_option("--seed", gen.seed, "override the spec's rng_seed");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "revenue-neutral capacity price");
  calibrate->add_option("--loads", cal.loads, "load CSV")->required();
  calibrate->add_option("--tariff", cal.tariff, "tariff config JSON")->required();
  calibrate->add_option("--regime", cal.regime, "static or dynamic")
      ->required()
      ->check(CLI::IsMember({"energy", "static", "dynamic"}));
  calibrate->add_option("--out", cal.out, "calibrated tariff JSON")->required();
  calibrate->add_option("--threshold-kw", cal.threshold_kw, "activation threshold (kW)");
  calibrate->add_option("--activations", cal.activations, "activation CSV");
  calibrate->add_option("--vcl-segments", cal.vcl_segments, "VCL segments per stack");
  calibrate->add_option("--tolerance", cal.tolerance, "relative revenue gap");
  calibrate->add_option("--min-level", cal.min_level, "minimum subscription (kW)");
  calibrate->add_option("--jobs", cal.jobs, "worker threads");

  StudyArgs st;
  auto* study = app.add_subcommand("study", "run a multi-year tariff study");
  study->add_option("--loads", st.loads, "load CSV");
  study->add_option("--tariff", st.tariff, "tariff config JSON");
  study->add_option("--regime", st.regimes, "static and/or dynamic (repeatable)")
      ->check(CLI::IsMember({"energy", "static", "dynamic"}));
  study->add_option("--policy", st.policies, "det, stoch and/or reactive (repeatable)")
      ->check(CLI::IsMember({"det", "stoch", "reactive"}));
  study->add_option("--threshold-kw", st.threshold_kw, "activation threshold (kW)");
  study->add_option("--activations", st.activations, "activation CSV");
  study->add_option("--vcl-segments", st.vcl_segments, "VCL segments per stack");
  study->add_option("--seed", st.seed, "recorded in the manifest");
  study->add_flag("--calibrate", st.calibrate, "calibrate capacity prices first");
  study->add_option("--tolerance", st.tolerance, "calibration relative gap");
  study->add_option("--min-level", st.min_level, "minimum subscription (kW)");
  study->add_option("--manifest", st.manifest, "rerun from a study.json");
  study->add_option("--out", st.out, "output directory")->required();
  study->add_option("--jobs", st.jobs, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kSuccess : kInputError;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*calibrate) return run_calibrate(cal);
    if (*study) return run_study(st);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const CalibrationFailed& e) {
    std::cerr << "calibration failed: " << e.what() << '\n';
    return kCalibrationFailure;
  } catch (const InvariantViolation& e) {
    std::cerr << "internal invariant violated: " << e.what() << '\n';
    return kInternalError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInputError;
}

}  // namespace cstariff::cli
