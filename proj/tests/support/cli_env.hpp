#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "cstariff/cli.hpp"

namespace cstariff::fixtures {

inline int run(std::vector<std::string> args) {
  args.insert(args.begin(), "cstariff");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_cli(int(argv.size()), argv.data());
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Fresh scratch directory under the system temp dir, removed on scope exit.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cstariff_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  std::filesystem::path path_;
};

inline constexpr const char* kTariffJson = R"({
  "energy":  {"fixed_eur_per_year": 204.6, "energy_ct_per_kwh": 1.859},
  "static":  {"fixed_eur_per_year": 135, "capacity_eur_per_kw_year": 67.5,
              "energy_ct_per_kwh": 0.5, "excess_ct_per_kwh": 10},
  "dynamic": {"fixed_eur_per_year": 135, "capacity_eur_per_kw_year": 54,
              "energy_ct_per_kwh": 0.5, "voll_eur_per_kwh": 5, "vcl_steepness": 8}
})";

inline std::string small_spec_json(std::size_t consumers, std::uint64_t seed = 7) {
  nlohmann::json j = {{"consumer_count", consumers},
                      {"years", {2015, 2016}},
                      {"rng_seed", seed},
                      {"base_load_kw", 1.6},
                      {"seasonal_amplitude", 1.0},
                      {"daily_amplitude", 0.5},
                      {"spike_rate", 40},
                      {"spike_magnitude", 2.5},
                      {"cold_year_factor", {1.0, 1.2}},
                      {"noise_kw", 0.3},
                      {"heterogeneity", 0.5}};
  return j.dump(2);
}

}  // namespace cstariff::fixtures
