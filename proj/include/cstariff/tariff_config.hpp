#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "cstariff/data_model.hpp"
#include "cstariff/errors.hpp"
#include "cstariff/vcl.hpp"

namespace cstariff {

/// Tariff books for every regime a study may run. Per-kWh prices are read
/// from either an `_eur_per_kwh` or a `_ct_per_kwh` field (not both).
///
///   {
///     "energy":  {"fixed_eur_per_year": 204.6, "energy_ct_per_kwh": 1.859},
///     "static":  {"fixed_eur_per_year": 135, "capacity_eur_per_kw_year": 67.5,
///                 "energy_ct_per_kwh": 0.5, "excess_ct_per_kwh": 10},
///     "dynamic": {"fixed_eur_per_year": 135, "capacity_eur_per_kw_year": 54,
///                 "energy_ct_per_kwh": 0.5, "voll_eur_per_kwh": 5,
///                 "vcl_steepness": 8}
///   }
struct TariffConfig {
  std::optional<TariffBook> energy;
  std::optional<TariffBook> static_cs;
  std::optional<TariffBook> dynamic_cs;
  VclCurveParams vcl{};

  const TariffBook& book(Regime r) const {
    const auto& b = r == Regime::EnergyOnly ? energy
                    : r == Regime::StaticCS ? static_cs
                                            : dynamic_cs;
    if (!b) {
      throw InputError(std::string("tariff config has no '") + regime_name(r) +
                       "' section");
    }
    return *b;
  }

  void set_book(const TariffBook& b) {
    (b.regime == Regime::EnergyOnly ? energy
     : b.regime == Regime::StaticCS ? static_cs
                                    : dynamic_cs) = b;
  }
};

namespace detail {

inline double number_field(const nlohmann::json& section, const std::string& where,
                           const std::string& name) {
  const auto it = section.find(name);
  if (it == section.end()) {
    throw InputError("tariff section '" + where + "' is missing field '" + name + "'");
  }
  if (!it->is_number()) {
    throw InputError("field '" + where + "." + name + "' must be a number");
  }
  return it->get<double>();
}

/// Price per kWh in EUR from `<stem>_eur_per_kwh` or `<stem>_ct_per_kwh`.
inline double per_kwh_field(const nlohmann::json& section, const std::string& where,
                            const std::string& stem) {
  const bool eur = section.contains(stem + "_eur_per_kwh");
  const bool ct = section.contains(stem + "_ct_per_kwh");
  if (eur && ct) {
    throw InputError("tariff section '" + where + "' gives " + stem +
                     " in both EUR and EUR-cents");
  }
  if (ct) return number_field(section, where, stem + "_ct_per_kwh") / 100.0;
  return number_field(section, where, stem + "_eur_per_kwh");
}

}  // namespace detail

inline TariffConfig tariff_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("tariff config must be a JSON object");
  TariffConfig cfg;
  try {
    if (const auto it = j.find("energy"); it != j.end()) {
      cfg.energy = TariffBook::energy_only(
          detail::number_field(*it, "energy", "fixed_eur_per_year"),
          detail::per_kwh_field(*it, "energy", "energy"));
    }
    if (const auto it = j.find("static"); it != j.end()) {
      cfg.static_cs = TariffBook::static_cs(
          detail::number_field(*it, "static", "fixed_eur_per_year"),
          detail::number_field(*it, "static", "capacity_eur_per_kw_year"),
          detail::per_kwh_field(*it, "static", "energy"),
          detail::per_kwh_field(*it, "static", "excess"));
    }
    if (const auto it = j.find("dynamic"); it != j.end()) {
      cfg.dynamic_cs = TariffBook::dynamic_cs(
          detail::number_field(*it, "dynamic", "fixed_eur_per_year"),
          detail::number_field(*it, "dynamic", "capacity_eur_per_kw_year"),
          detail::per_kwh_field(*it, "dynamic", "energy"),
          detail::number_field(*it, "dynamic", "voll_eur_per_kwh"));
      cfg.vcl.voll = cfg.dynamic_cs->voll;
      if (it->contains("vcl_steepness")) {
        cfg.vcl.steepness_b = detail::number_field(*it, "dynamic", "vcl_steepness");
      }
      cfg.vcl.validate();
    }
  } catch (const DomainError& e) {
    throw InputError(std::string("invalid tariff config: ") + e.what());
  }
  if (!cfg.energy && !cfg.static_cs && !cfg.dynamic_cs) {
    throw InputError("tariff config has no tariff sections");
  }
  return cfg;
}

inline nlohmann::json book_to_json(const TariffBook& b) {
  switch (b.regime) {
    case Regime::EnergyOnly:
      return {{"fixed_eur_per_year", b.fixed_annual},
              {"energy_eur_per_kwh", b.energy_price}};
    case Regime::StaticCS:
      return {{"fixed_eur_per_year", b.fixed_annual},
              {"capacity_eur_per_kw_year", b.capacity_price},
              {"energy_eur_per_kwh", b.energy_price},
              {"excess_eur_per_kwh", b.excess_price}};
    case Regime::DynamicCS:
      return {{"fixed_eur_per_year", b.fixed_annual},
              {"capacity_eur_per_kw_year", b.capacity_price},
              {"energy_eur_per_kwh", b.energy_price},
              {"voll_eur_per_kwh", b.voll}};
  }
  return {};
}

inline nlohmann::json tariff_config_to_json(const TariffConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  if (cfg.energy) j["energy"] = book_to_json(*cfg.energy);
  if (cfg.static_cs) j["static"] = book_to_json(*cfg.static_cs);
  if (cfg.dynamic_cs) {
    j["dynamic"] = book_to_json(*cfg.dynamic_cs);
    j["dynamic"]["vcl_steepness"] = cfg.vcl.steepness_b;
  }
  return j;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// Also accepts the output of `cstariff calibrate`, using its "tariff" member.
inline TariffConfig read_tariff_config(const std::string& path) {
  const auto j = read_json_file(path);
  if (j.is_object() && j.contains("tariff") && j.contains("diagnostics")) {
    return tariff_config_from_json(j.at("tariff"));
  }
  return tariff_config_from_json(j);
}

}  // namespace cstariff
