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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("coinvest_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // One-day hourly scenario with the given number of SPs.
  static ordered_json day(int sps, double sigma = 0.3) {
    ordered_json j = {{"schema_version", 1},
                      {"economics", {{"capacity_price", 10.94}, {"maintenance_price", 16.25}, {"saturation", 0.03}}},
                      {"horizon", {{"investment_years", 24.0 / 8760.0}, {"slot_hours", 1}}},
                      {"uncertainty", {{"model", "bounded"}, {"sigma", sigma}}},
                      {"service_providers", ordered_json::array()}};
    for (int i = 0; i < sps; ++i) {
      j["service_providers"].push_back(
          {{"name", "sp" + std::to_string(i + 1)},
           {"benefit", 6e-6},
           {"profile",
            {{"base_rate", 4e5}, {"components", {{{"amplitude", 2.5e5}, {"phase", 5.0 * i}}}}}}});
    }
    return j;
  }

  fs::path write(const std::string& name, const ordered_json& j) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(COINVEST_CLI_PATH) + " " + args + " >" + (dir_ / "stdout").string() +
                            " 2>" + (dir_ / "stderr").string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  static std::vector<std::string> lines(const fs::path& p) {
    std::vector<std::string> out;
    std::istringstream in(read(p));
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      out.push_back(line);
    }
    return out;
  }

  std::string err() const { return read(dir_ / "stderr"); }

  fs::path dir_;
};

TEST_F(Cli, PlanWritesCapacityAndShares) {
  const fs::path cfg = write("s.json", day(1));
  const fs::path out = dir_ / "plan.csv";
  ASSERT_EQ(run("plan " + cfg.string() + " --out " + out.string()), 0) << err();
  const auto rows = lines(out);
  // Header, one capacity row, 24 share rows for the only SP.
  ASSERT_EQ(rows.size(), 26u);
  const auto side = ordered_json::parse(read(dir_ / "plan.json"));
  EXPECT_EQ(side["horizon_slots"], 24);
  EXPECT_GT(side["grand"]["capacity_vcores"].get<double>(), 0.0);
}

TEST_F(Cli, PlanAllCoalitionsCoversEverySubset) {
  const fs::path cfg = write("s.json", day(2));
  const fs::path out = dir_ / "plan.csv";
  ASSERT_EQ(run("plan " + cfg.string() + " --all-coalitions --out " + out.string()), 0) << err();
  auto capacity_rows = [&] {
    std::size_t n = 0;
    for (const auto& r : lines(out)) n += r.ends_with(",,,") ? 1 : 0;
    return n;
  };
  EXPECT_EQ(capacity_rows(), 8u);
  EXPECT_EQ(ordered_json::parse(read(dir_ / "plan.json"))["coalitions"].size(), 8u);
  ASSERT_EQ(run("plan " + cfg.string() + " --out " + out.string()), 0) << err();
  EXPECT_EQ(capacity_rows(), 1u);
  EXPECT_EQ(lines(out).size(), 2u + 2u * 24u);
}

TEST_F(Cli, InvalidConfigExitsOneAndNamesTheField) {
  const fs::path cfg = write("s.json", day(2, 1.5));
  EXPECT_EQ(run("plan " + cfg.string() + " --out " + (dir_ / "p.csv").string()), 1);
  EXPECT_NE(err().find("uncertainty.sigma"), std::string::npos) << err();
  EXPECT_FALSE(fs::exists(dir_ / "p.csv"));
  EXPECT_EQ(run("plan " + (dir_ / "missing.json").string() + " --out " + (dir_ / "p.csv").string()), 1);
  EXPECT_EQ(run("plan --no-such-flag"), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, StabilityOnFbmExitsThree) {
  auto j = day(2);
  j["uncertainty"] = {{"model", "fbm"}, {"alpha", 0.5}, {"hurst", 0.7}};
  const fs::path cfg = write("f.json", j);
  EXPECT_EQ(run("stability " + cfg.string() + " --out " + (dir_ / "s.csv").string()), 3);
  EXPECT_EQ(run("simulate " + cfg.string() + " --sigma 0.2 --out " + (dir_ / "s.csv").string()), 3);
}

TEST_F(Cli, StabilitySweep) {
  const fs::path cfg = write("s.json", day(2));
  const fs::path out = dir_ / "stab.csv";
  ASSERT_EQ(run("stability " + cfg.string() + " --sigma 0,0.1,0.5 --out " + out.string()), 0) << err();
  const auto nu = lines(dir_ / "stab_nu.csv");
  ASSERT_EQ(nu.size(), 4u);
  EXPECT_EQ(nu[0], "sigma,nu_lb");
  EXPECT_EQ(nu[1], "0,1");
  EXPECT_EQ(lines(out).size(), 1u + 3u * 3u);
}

TEST_F(Cli, SimulateIsIndependentOfThreadCount) {
  const fs::path cfg = write("s.json", day(3));
  const std::string base = "simulate " + cfg.string() + " -n 64 --seed 11 ";
  ASSERT_EQ(run(base + "--threads 1 --out " + (dir_ / "a.csv").string()), 0) << err();
  ASSERT_EQ(run(base + "--threads 8 --out " + (dir_ / "b.csv").string()), 0) << err();
  EXPECT_EQ(read(dir_ / "a.csv"), read(dir_ / "b.csv"));
  EXPECT_EQ(read(dir_ / "a.json"), read(dir_ / "b.json"));
  EXPECT_EQ(lines(dir_ / "a.csv").size(), 1u + 64u * 4u);
}

TEST_F(Cli, DeterministicRealizationReproducesNominalShapley) {
  const fs::path cfg = write("s.json", day(2));
  ASSERT_EQ(run("simulate " + cfg.string() + " -n 1 --sigma 0 --out " + (dir_ / "a.csv").string()), 0) << err();
  const auto side = ordered_json::parse(read(dir_ / "a.json"));
  for (const auto& [name, x] : side["shapley_expected"].items()) {
    const double realized = side["shapley_payoff"][name]["mean"].get<double>();
    EXPECT_NEAR(realized, x.get<double>(), 1e-9 * std::max(1.0, std::abs(x.get<double>()))) << name;
  }
  EXPECT_EQ(side["nu_lower_bound"], 1.0);
  EXPECT_EQ(side["containment_failures"], 0);
}

TEST_F(Cli, PaybackPerPeriod) {
  const fs::path cfg = write("s.json", day(2));
  std::ostringstream periods;
  periods.precision(17);
  periods << "--periods " << 24.0 / 8760.0 << "," << 48.0 / 8760.0;
  ASSERT_EQ(run("payback " + cfg.string() + " -n 20 " + periods.str() + " --out " + (dir_ / "p.csv").string()), 0)
      << err();
  const auto rows = lines(dir_ / "p.csv");
  ASSERT_EQ(rows.size(), 41u);
  EXPECT_EQ(rows[0], "investment_years,omega,payback_slot,payback_years,censored");
  const auto side = ordered_json::parse(read(dir_ / "p.json"));
  EXPECT_EQ(side["periods"].size(), 2u);
  EXPECT_EQ(run("payback " + cfg.string() + " --periods 0 --out " + (dir_ / "q.csv").string()), 1);
}

TEST_F(Cli, NothingInstalledPaysBackImmediately) {
  auto j = day(2);
  for (auto& sp : j["service_providers"]) sp["profile"] = {{"base_rate", 1.0}};
  const fs::path cfg = write("s.json", j);
  ASSERT_EQ(run("payback " + cfg.string() + " -n 5 --out " + (dir_ / "p.csv").string()), 0) << err();
  const auto rows = lines(dir_ / "p.csv");
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_TRUE(rows[k].ends_with(",0,0,0")) << rows[k];
  const auto side = ordered_json::parse(read(dir_ / "p.json"));
  EXPECT_EQ(side["periods"][0]["grand_cost"], 0.0);
}

TEST_F(Cli, DumpConfigRoundTrips) {
  const fs::path cfg = write("s.json", day(3));
  const fs::path dumped = dir_ / "eff.json";
  ASSERT_EQ(run("plan " + cfg.string() + " --sps sp1,sp3 --dump-config " + dumped.string() + " --out " +
                (dir_ / "a.csv").string()),
            0)
      << err();
  const auto eff = ordered_json::parse(read(dumped));
  EXPECT_EQ(eff["service_providers"].size(), 2u);
  ASSERT_EQ(run("plan " + dumped.string() + " --out " + (dir_ / "b.csv").string()), 0) << err();
  EXPECT_EQ(read(dir_ / "a.csv"), read(dir_ / "b.csv"));
  EXPECT_EQ(run("plan " + cfg.string() + " --sps nobody --out " + (dir_ / "c.csv").string()), 1);
}

}  // namespace
