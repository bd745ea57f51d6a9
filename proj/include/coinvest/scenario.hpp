// Copyright 2026 The Coinvest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COINVEST_SCENARIO_HPP
#define COINVEST_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "coinvest/economics.hpp"
#include "coinvest/player_set.hpp"
#include "coinvest/traffic.hpp"

namespace coinvest {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kHoursPerYear = 8760.0;

/// Invalid scenario; `field()` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class UncertaintyKind { kBounded, kFbm };

struct ProviderConfig {
  std::string name;
  double benefit = 0.0;  ///< $/request
  RateProfile profile;

  friend bool operator==(const ProviderConfig&, const ProviderConfig&) = default;
};

/// One scenario: prices, horizon, load model and the service providers. The
/// InP is implicit and always player 0.
struct ScenarioConfig {
  double capacity_price = 0.0;     ///< $/vcore
  double maintenance_price = 0.0;  ///< $/(hour vcore)
  double saturation = 0.0;         ///< 1/vcore
  double investment_years = 0.0;
  double slot_hours = 1.0;
  UncertaintyKind model = UncertaintyKind::kBounded;
  double sigma = 0.0;
  double alpha = 0.0;
  double hurst = 0.5;
  std::vector<ProviderConfig> providers;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

  double investment_hours() const { return investment_years * kHoursPerYear; }
  std::size_t horizon() const {
    return static_cast<std::size_t>(std::llround(investment_hours() / slot_hours));
  }
  int players() const { return static_cast<int>(providers.size()) + 1; }

  std::vector<std::string> player_names() const {
    std::vector<std::string> out{"InP"};
    for (const auto& p : providers) out.push_back(p.name);
    return out;
  }

  EconomicParams economics() const {
    EconomicParams p;
    p.capacity_price = capacity_price;
    p.maintenance_price = maintenance_price;
    p.investment_hours = investment_hours();
    p.slot_hours = slot_hours;
    p.horizon = horizon();
    p.benefit.push_back(0.0);
    for (const auto& sp : providers) p.benefit.push_back(sp.benefit);
    p.saturation = saturation;
    return p;
  }

  std::vector<LoadModel> load_models() const {
    std::vector<LoadModel> out;
    const double seconds = slot_hours * 3600.0;
    for (const auto& sp : providers) {
      if (model == UncertaintyKind::kBounded) {
        out.emplace_back(BoundedLoadModel(sp.profile, sigma, seconds));
      } else {
        out.emplace_back(FbmLoadModel(sp.profile, alpha, hurst, seconds));
      }
    }
    return out;
  }
};

namespace detail {

using json = nlohmann::ordered_json;

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline const json& require(const json& obj, const std::string& path, const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join_path(path, key), "required field is missing");
  return *it;
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

/// Rejects keys outside `allowed`; keys starting with '$' are annotations.
inline void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!key.empty() && key[0] == '$') continue;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join_path(path, key), "unknown field");
  }
}

inline double number(const json& obj, const std::string& path, const std::string& key) {
  const json& v = require(obj, path, key);
  if (!v.is_number()) throw ConfigError(join_path(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join_path(path, key), "must be finite");
  return x;
}

inline double number_or(const json& obj, const std::string& path, const std::string& key, double fallback) {
  return obj.contains(key) ? number(obj, path, key) : fallback;
}

inline RateProfile parse_profile(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"base_rate", "period", "components"});
  const double base = number(j, path, "base_rate");
  std::size_t period = 24;
  if (j.contains("period")) {
    const json& p = j.at("period");
    if (!p.is_number_integer() || p.get<long long>() < 1) {
      throw ConfigError(join_path(path, "period"), "expected a positive integer number of slots");
    }
    period = p.get<std::size_t>();
  }
  std::vector<SinusoidComponent> components;
  if (j.contains("components")) {
    const json& list = j.at("components");
    const std::string lpath = join_path(path, "components");
    if (!list.is_array()) throw ConfigError(lpath, "expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string cpath = lpath + "[" + std::to_string(k) + "]";
      require_object(list[k], cpath);
      check_keys(list[k], cpath, {"amplitude", "phase"});
      components.push_back({number(list[k], cpath, "amplitude"), number_or(list[k], cpath, "phase", 0.0)});
    }
  }
  try {
    return RateProfile(base, std::move(components), period);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace detail

/// Builds and validates a scenario from its JSON form.
inline ScenarioConfig parse_scenario(const nlohmann::ordered_json& j) {
  using detail::number;
  using detail::require;
  detail::require_object(j, "");
  detail::check_keys(j, "", {"schema_version", "economics", "horizon", "uncertainty", "service_providers"});

  const nlohmann::ordered_json& version = require(j, "", "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw ConfigError("schema_version", "unsupported schema version (expected " +
                                            std::to_string(kSchemaVersion) + ")");
  }

  ScenarioConfig c;
  const auto& econ = require(j, "", "economics");
  detail::require_object(econ, "economics");
  detail::check_keys(econ, "economics", {"capacity_price", "maintenance_price", "saturation"});
  c.capacity_price = number(econ, "economics", "capacity_price");
  c.maintenance_price = number(econ, "economics", "maintenance_price");
  c.saturation = number(econ, "economics", "saturation");
  if (c.capacity_price < 0.0) throw ConfigError("economics.capacity_price", "must be >= 0");
  if (c.maintenance_price < 0.0) throw ConfigError("economics.maintenance_price", "must be >= 0");
  if (!(c.saturation > 0.0)) throw ConfigError("economics.saturation", "must be > 0");

  const auto& hz = require(j, "", "horizon");
  detail::require_object(hz, "horizon");
  detail::check_keys(hz, "horizon", {"investment_years", "slot_hours"});
  c.investment_years = number(hz, "horizon", "investment_years");
  c.slot_hours = detail::number_or(hz, "horizon", "slot_hours", 1.0);
  if (!(c.investment_years > 0.0)) throw ConfigError("horizon.investment_years", "must be > 0");
  if (!(c.slot_hours > 0.0)) throw ConfigError("horizon.slot_hours", "must be > 0");
  const double slots = c.investment_hours() / c.slot_hours;
  if (std::abs(slots - std::round(slots)) > 1e-9 * slots || std::round(slots) < 1.0) {
    throw ConfigError("horizon.slot_hours", "investment period must be a whole number of slots");
  }
  if (c.capacity_price + c.maintenance_price * c.investment_hours() <= 0.0) {
    throw ConfigError("economics", "capacity_price + maintenance_price * investment hours must be > 0");
  }

  const auto& unc = require(j, "", "uncertainty");
  detail::require_object(unc, "uncertainty");
  const auto& kind = require(unc, "uncertainty", "model");
  if (!kind.is_string()) throw ConfigError("uncertainty.model", "expected \"bounded\" or \"fbm\"");
  if (kind.get<std::string>() == "bounded") {
    c.model = UncertaintyKind::kBounded;
    detail::check_keys(unc, "uncertainty", {"model", "sigma"});
    c.sigma = number(unc, "uncertainty", "sigma");
    if (!(c.sigma >= 0.0 && c.sigma <= 1.0)) throw ConfigError("uncertainty.sigma", "must lie in [0, 1]");
  } else if (kind.get<std::string>() == "fbm") {
    c.model = UncertaintyKind::kFbm;
    detail::check_keys(unc, "uncertainty", {"model", "alpha", "hurst"});
    c.alpha = number(unc, "uncertainty", "alpha");
    c.hurst = number(unc, "uncertainty", "hurst");
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw ConfigError("uncertainty.alpha", "must lie in [0, 1]");
    if (!(c.hurst > 0.0 && c.hurst < 1.0)) throw ConfigError("uncertainty.hurst", "must lie in (0, 1)");
  } else {
    throw ConfigError("uncertainty.model", "expected \"bounded\" or \"fbm\"");
  }

  const auto& sps = require(j, "", "service_providers");
  if (!sps.is_array() || sps.empty()) {
    throw ConfigError("service_providers", "expected a non-empty array");
  }
  if (sps.size() + 1 > static_cast<std::size_t>(kMaxPlayers)) {
    throw ConfigError("service_providers", "at most " + std::to_string(kMaxPlayers - 1) + " providers");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < sps.size(); ++i) {
    const std::string path = "service_providers[" + std::to_string(i) + "]";
    detail::require_object(sps[i], path);
    detail::check_keys(sps[i], path, {"name", "benefit", "profile"});
    ProviderConfig sp;
    const auto& name = require(sps[i], path, "name");
    if (!name.is_string() || name.get<std::string>().empty()) {
      throw ConfigError(path + ".name", "expected a non-empty string");
    }
    sp.name = name.get<std::string>();
    if (sp.name == "InP" || !names.insert(sp.name).second) {
      throw ConfigError(path + ".name", "duplicate or reserved name '" + sp.name + "'");
    }
    sp.benefit = number(sps[i], path, "benefit");
    if (sp.benefit < 0.0) throw ConfigError(path + ".benefit", "must be >= 0");
    sp.profile = detail::parse_profile(require(sps[i], path, "profile"), path + ".profile");
    c.providers.push_back(std::move(sp));
  }
  return c;
}

inline ScenarioConfig parse_scenario(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("not valid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

inline nlohmann::ordered_json to_json(const ScenarioConfig& c) {
  using json = nlohmann::ordered_json;
  json unc = {{"model", c.model == UncertaintyKind::kBounded ? "bounded" : "fbm"}};
  if (c.model == UncertaintyKind::kBounded) {
    unc["sigma"] = c.sigma;
  } else {
    unc["alpha"] = c.alpha;
    unc["hurst"] = c.hurst;
  }
  json sps = json::array();
  for (const auto& sp : c.providers) {
    json comps = json::array();
    for (const auto& k : sp.profile.components()) comps.push_back({{"amplitude", k.amplitude}, {"phase", k.phase}});
    sps.push_back({{"name", sp.name},
                   {"benefit", sp.benefit},
                   {"profile",
                    {{"base_rate", sp.profile.base_rate()},
                     {"period", sp.profile.period()},
                     {"components", comps}}}});
  }
  return {{"schema_version", kSchemaVersion},
          {"economics",
           {{"capacity_price", c.capacity_price},
            {"maintenance_price", c.maintenance_price},
            {"saturation", c.saturation}}},
          {"horizon", {{"investment_years", c.investment_years}, {"slot_hours", c.slot_hours}}},
          {"uncertainty", unc},
          {"service_providers", sps}};
}

/// Keeps only the named providers, in their original order.
inline ScenarioConfig restrict_providers(const ScenarioConfig& c, const std::vector<std::string>& keep) {
  ScenarioConfig out = c;
  out.providers.clear();
  for (const auto& name : keep) {
    bool found = false;
    for (const auto& sp : c.providers) found = found || sp.name == name;
    if (!found) throw ConfigError("service_providers", "no provider named '" + name + "'");
  }
  for (const auto& sp : c.providers) {
    if (std::find(keep.begin(), keep.end(), sp.name) != keep.end()) out.providers.push_back(sp);
  }
  return out;
}

}  // namespace coinvest

#endif  // COINVEST_SCENARIO_HPP
