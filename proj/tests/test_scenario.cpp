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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coinvest/output.hpp"
#include "coinvest/scenario.hpp"

namespace coinvest {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ordered_json minimal() {
  return ordered_json::parse(R"({
    "schema_version": 1,
    "economics": {"capacity_price": 10.94, "maintenance_price": 16.25, "saturation": 0.03},
    "horizon": {"investment_years": 5, "slot_hours": 1},
    "uncertainty": {"model": "bounded", "sigma": 0.2},
    "service_providers": [
      {"name": "a", "benefit": 6e-6, "profile": {"base_rate": 100, "components": [{"amplitude": 50, "phase": 3}]}},
      {"name": "b", "benefit": 5e-6, "profile": {"base_rate": 80}}
    ]
  })");
}

std::string field_of(const ordered_json& j) {
  try {
    parse_scenario(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

TEST(Scenario, ParsesAndMapsToModelTypes) {
  const ScenarioConfig c = parse_scenario(minimal());
  EXPECT_EQ(c.players(), 3);
  EXPECT_EQ(c.horizon(), 43800u);
  const EconomicParams p = c.economics();
  EXPECT_NO_THROW(p.validate());
  EXPECT_DOUBLE_EQ(p.investment_hours, 43800.0);
  EXPECT_EQ(p.benefit, (std::vector<double>{0.0, 6e-6, 5e-6}));
  const auto models = c.load_models();
  ASSERT_EQ(models.size(), 2u);
  const auto& m = std::get<BoundedLoadModel>(models[0]);
  EXPECT_DOUBLE_EQ(m.sigma(), 0.2);
  EXPECT_DOUBLE_EQ(m.expected_load(3), 100.0 * 3600.0);
  EXPECT_EQ(c.player_names(), (std::vector<std::string>{"InP", "a", "b"}));
}

TEST(Scenario, RoundTripsThroughJson) {
  const ScenarioConfig c = parse_scenario(minimal());
  const ScenarioConfig again = parse_scenario(ordered_json::parse(to_json(c).dump()));
  EXPECT_EQ(c, again);
  auto f = minimal();
  f["uncertainty"] = {{"model", "fbm"}, {"alpha", 0.3}, {"hurst", 0.7}};
  const ScenarioConfig fc = parse_scenario(f);
  EXPECT_EQ(fc, parse_scenario(ordered_json::parse(to_json(fc).dump())));
  EXPECT_TRUE(std::holds_alternative<FbmLoadModel>(fc.load_models()[1]));
}

TEST(Scenario, ErrorsNameTheField) {
  auto j = minimal();
  j["uncertainty"]["sigma"] = 1.5;
  EXPECT_EQ(field_of(j), "uncertainty.sigma");

  j = minimal();
  j["economics"].erase("saturation");
  EXPECT_EQ(field_of(j), "economics.saturation");

  j = minimal();
  j["economics"]["capcity_price"] = 1.0;
  EXPECT_EQ(field_of(j), "economics.capcity_price");

  j = minimal();
  j["schema_version"] = 2;
  EXPECT_EQ(field_of(j), "schema_version");

  j = minimal();
  j["service_providers"][1]["name"] = "a";
  EXPECT_EQ(field_of(j), "service_providers[1].name");

  j = minimal();
  j["service_providers"][0]["profile"]["components"][0]["amplitude"] = 500;
  EXPECT_EQ(field_of(j), "service_providers[0].profile");

  j = minimal();
  j["service_providers"][0]["profile"]["components"][0]["amplitude"] = "big";
  EXPECT_EQ(field_of(j), "service_providers[0].profile.components[0].amplitude");

  j = minimal();
  j["horizon"]["slot_hours"] = 7;
  EXPECT_EQ(field_of(j), "horizon.slot_hours");

  j = minimal();
  j["uncertainty"] = {{"model", "fbm"}, {"alpha", 0.3}, {"hurst", 1.0}};
  EXPECT_EQ(field_of(j), "uncertainty.hurst");

  j = minimal();
  j["service_providers"] = ordered_json::array();
  EXPECT_EQ(field_of(j), "service_providers");

  j = minimal();
  j["economics"]["capacity_price"] = 0.0;
  j["economics"]["maintenance_price"] = 0.0;
  EXPECT_EQ(field_of(j), "economics");

  EXPECT_THROW(parse_scenario(std::string("{not json")), ConfigError);
}

TEST(Scenario, AnnotationsAreIgnored) {
  auto j = minimal();
  j["$comment"] = "free text";
  j["economics"]["$capacity_price"] = "where the number comes from";
  EXPECT_EQ(parse_scenario(j), parse_scenario(minimal()));
}

TEST(Scenario, RestrictProviders) {
  const ScenarioConfig c = parse_scenario(minimal());
  const ScenarioConfig only_b = restrict_providers(c, {"b"});
  ASSERT_EQ(only_b.providers.size(), 1u);
  EXPECT_EQ(only_b.providers[0].name, "b");
  EXPECT_THROW(restrict_providers(c, {"zzz"}), ConfigError);
}

TEST(Scenario, BundledConfigsLoad) {
  for (const char* name : {"two_providers_bounded.json", "two_providers_fbm.json"}) {
    const ScenarioConfig c = load_scenario(fs::path(COINVEST_CONFIG_DIR) / name);
    EXPECT_DOUBLE_EQ(c.capacity_price, 10.94) << name;
    EXPECT_DOUBLE_EQ(c.maintenance_price, 16.25) << name;
    EXPECT_DOUBLE_EQ(c.saturation, 0.03) << name;
    EXPECT_DOUBLE_EQ(c.investment_years, 5.0) << name;
    EXPECT_DOUBLE_EQ(c.slot_hours, 1.0) << name;
    for (const auto& sp : c.providers) EXPECT_DOUBLE_EQ(sp.benefit, 6e-6);
  }
}

TEST(Output, DoublesRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 6e-6, 7117609.40, -2.5e-300, 123456789012345678.0}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(Output, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("{InP,a}"), "\"{InP,a}\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  CsvBuilder csv({"a", "b"});
  csv.row({"1", "x,y"});
  EXPECT_EQ(csv.str(), "a,b\r\n1,\"x,y\"\r\n");
}

TEST(Output, AtomicWriteLeavesOnlyTheTarget) {
  const fs::path dir = fs::temp_directory_path() / "coinvest_output_test";
  fs::remove_all(dir);
  const fs::path target = dir / "nested" / "out.csv";
  write_atomic(target, "first\n");
  write_atomic(target, "second\n");
  std::ifstream in(target);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), "second\n");
  EXPECT_EQ(std::distance(fs::directory_iterator(target.parent_path()), fs::directory_iterator()), 1);
  EXPECT_EQ(sibling(target, "_nu", ".csv"), dir / "nested" / "out_nu.csv");
  fs::remove_all(dir);
}

}  // namespace
}  // namespace coinvest
