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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "coinvest/montecarlo.hpp"
#include "test_support.hpp"

namespace coinvest {
namespace {

using coinvest::testing::make_params;

struct Fixture {
  EconomicParams params;
  LoadSampler sampler;
  ValueTable table;
};

// Three SPs with offset daily peaks; short horizon so each run is cheap.
Fixture make_fixture(double sigma, std::size_t horizon = 48) {
  std::vector<LoadModel> models;
  const double bases[] = {1500.0, 1200.0, 900.0};
  for (int i = 0; i < 3; ++i) {
    models.emplace_back(BoundedLoadModel(RateProfile(bases[i], {{0.6 * bases[i], 8.0 * i}}), sigma, 3600.0));
  }
  auto p = make_params(horizon, 1.0, 10.0, 5.0, {1e-4, 1.2e-4, 0.8e-4}, 0.03);
  LoadSampler sampler(models, horizon);
  ValueTable table = build_value_table(4, sampler.expected(), p);
  return {p, std::move(sampler), std::move(table)};
}

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(Payments, BothModesCoverTheCost) {
  const std::vector<double> expected{0.0, 10.0, 6.0};
  const std::vector<double> nominal{3.0, 5.0, 4.0};  // sums to v = 12, cost = 4
  const std::vector<double> collected{0.0, 12.0, 5.0};
  const std::vector<double> realized{2.0, 7.0, 4.0};  // sums to 13
  const auto ante = payments(PaymentMode::kExAnte, expected, nominal, collected, realized);
  const auto post = payments(PaymentMode::kExPost, expected, nominal, collected, realized);
  EXPECT_DOUBLE_EQ(ante[0], -3.0);
  EXPECT_DOUBLE_EQ(total(ante), 4.0);
  EXPECT_DOUBLE_EQ(total(post), 4.0);
  EXPECT_DOUBLE_EQ(post[1], 5.0);
}

TEST(Simulator, ZeroSigmaReproducesTheNominalGame) {
  const Fixture f = make_fixture(0.0);
  const Simulator sim(f.sampler, f.params, f.table);
  const auto ante = sim.simulate(5, 1, {PaymentMode::kExAnte, 1, false});
  const auto post = sim.simulate(5, 1, {PaymentMode::kExPost, 1, false});
  const double scale = f.table.nominal.grand_value();
  const auto nominal = shapley(f.table.nominal);
  for (std::size_t w = 0; w < 5; ++w) {
    for (std::size_t m = 0; m < f.table.nominal.values.size(); ++m) {
      EXPECT_NEAR(post[w].realized_values[m], f.table.nominal.values[m], 1e-9 * scale);
    }
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(post[w].shapley[i], nominal[i], 1e-9 * scale);
      EXPECT_NEAR(post[w].deviations[i], 0.0, 1e-9 * scale);
      EXPECT_NEAR(post[w].payments[i], ante[w].payments[i], 1e-9 * scale);
    }
    EXPECT_EQ(post[w].payback_slot, post[0].payback_slot);
  }
  EXPECT_EQ(empirical_stability_frequency(post, 1e-6 * scale), 1.0);
  EXPECT_EQ(empirical_stability_frequency(post, 0.0), 0.0);
}

TEST(Simulator, RealizedValuesMatchDirectSummation) {
  const Fixture f = make_fixture(0.4);
  const Simulator sim(f.sampler, f.params, f.table);
  const std::uint64_t master = 77;
  const auto out = sim.simulate(3, master, {PaymentMode::kExPost, 1, true});
  for (const auto& o : out) {
    ASSERT_TRUE(o.loads.has_value());
    EXPECT_EQ(*o.loads, f.sampler.sample(derive_seed(master, o.omega)));
    for (std::size_t m = 0; m < f.table.plans.size(); ++m) {
      const PlayerSet s(static_cast<std::uint32_t>(m), 4);
      EXPECT_NEAR(o.realized_values[m], realized_value(s, f.table.plans[m], *o.loads, f.params),
                  1e-9 * std::max(1.0, std::abs(o.realized_values[m])));
    }
    // per-realization Shapley against the permutation definition
    std::vector<int> order{0, 1, 2, 3};
    std::vector<double> x(4, 0.0);
    const TuGame g(4, o.realized_values);
    int perms = 0;
    do {
      PlayerSet s = PlayerSet::none(4);
      for (int i : order) {
        x[static_cast<std::size_t>(i)] += marginal_contribution(g, i, s);
        s = s.with(i);
      }
      ++perms;
    } while (std::next_permutation(order.begin(), order.end()));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(o.shapley[i], x[i] / perms, 1e-9 * std::abs(g.grand_value()));
  }
}

TEST(Simulator, BudgetBalanceInEveryRealization) {
  const Fixture f = make_fixture(0.8);
  const Simulator sim(f.sampler, f.params, f.table);
  const double cost_n = cost(f.params, f.table.grand_plan().capacity);
  ASSERT_GT(cost_n, 0.0);
  for (PaymentMode mode : {PaymentMode::kExAnte, PaymentMode::kExPost}) {
    for (const auto& o : sim.simulate(200, 9, {mode, 4, false})) {
      const double collected = total(o.collected);
      EXPECT_NEAR(total(o.payments), cost_n, 1e-9 * cost_n);
      EXPECT_NEAR(total(o.rewards), collected, 1e-9 * collected);
      EXPECT_NEAR(total(o.shapley), o.realized_values.back(), 1e-9 * collected);
      EXPECT_EQ(o.collected[0], 0.0);
      if (mode == PaymentMode::kExAnte) {
        EXPECT_DOUBLE_EQ(o.payments[0], -sim.nominal_shapley()[0]);
      }
    }
  }
}

TEST(Simulator, WorkerCountDoesNotChangeResults) {
  const Fixture f = make_fixture(0.5);
  const Simulator sim(f.sampler, f.params, f.table);
  const auto a = sim.simulate(64, 5, {PaymentMode::kExPost, 1, false});
  const auto b = sim.simulate(64, 5, {PaymentMode::kExPost, 8, false});
  for (std::size_t w = 0; w < 64; ++w) {
    EXPECT_EQ(a[w].shapley, b[w].shapley);
    EXPECT_EQ(a[w].payments, b[w].payments);
    EXPECT_EQ(a[w].payback_slot, b[w].payback_slot);
  }
}

TEST(Simulator, NullProviderGetsNothing) {
  std::vector<LoadModel> models{BoundedLoadModel(RateProfile(2000.0), 0.5, 3600.0),
                                BoundedLoadModel(RateProfile(0.0), 0.5, 3600.0)};
  const auto p = make_params(24, 1.0, 10.0, 5.0, {1e-4, 1e-4}, 0.03);
  const LoadSampler sampler(models, 24);
  const ValueTable table = build_value_table(3, sampler.expected(), p);
  const Simulator sim(sampler, p, table);
  for (const auto& o : sim.simulate(20, 3)) EXPECT_EQ(o.shapley[2], 0.0);
}

TEST(Simulator, ZeroCostPaysBackImmediately) {
  // prices far above any revenue: nothing is installed
  std::vector<LoadModel> models{BoundedLoadModel(RateProfile(10.0), 0.5, 3600.0)};
  const auto p = make_params(24, 1.0, 10.0, 5.0, {1e-6}, 0.03);
  const LoadSampler sampler(models, 24);
  const ValueTable table = build_value_table(2, sampler.expected(), p);
  ASSERT_EQ(table.grand_plan().capacity, 0.0);
  const Simulator sim(sampler, p, table);
  for (const auto& o : sim.simulate(10, 3)) EXPECT_EQ(o.payback_slot, std::optional<std::size_t>(0));
}

TEST(Simulator, PaybackSlotIsFirstCoveringPrefix) {
  const Fixture f = make_fixture(0.3);
  const Simulator sim(f.sampler, f.params, f.table);
  const double cost_n = sim.grand_cost();
  for (const auto& o : sim.simulate(20, 4, {PaymentMode::kExPost, 1, true})) {
    const AllocationPlan& plan = f.table.grand_plan();
    double cumulative = 0.0;
    std::optional<std::size_t> expected;
    for (std::size_t t = 0; t < f.params.horizon && !expected; ++t) {
      for (int i : plan.members) {
        cumulative += utility(f.params.benefit[static_cast<std::size_t>(i)], f.params.saturation,
                              (*o.loads)(static_cast<std::size_t>(i), t), plan.share(i, t));
      }
      if (cumulative >= cost_n) expected = t + 1;
    }
    EXPECT_EQ(o.payback_slot, expected);
  }
}

TEST(Summary, QuantilesInterpolateLinearly) {
  const QuantileSummary q = summarize_values({4.0, 1.0, 3.0, 2.0, 5.0});
  EXPECT_EQ(q.min, 1.0);
  EXPECT_EQ(q.q25, 2.0);
  EXPECT_EQ(q.median, 3.0);
  EXPECT_EQ(q.q75, 4.0);
  EXPECT_EQ(q.max, 5.0);
  EXPECT_EQ(q.mean, 3.0);
  EXPECT_DOUBLE_EQ(summarize_values({0.0, 1.0}).q25, 0.25);
  EXPECT_EQ(summarize_values({}).count, 0u);
}

TEST(Summary, ProbabilitiesAndContainment) {
  const Fixture f = make_fixture(0.9);
  const Simulator sim(f.sampler, f.params, f.table);
  const auto out = sim.simulate(500, 12, {PaymentMode::kExPost, 4, false});
  const StabilityReport report = analyze_stability(f.table, f.sampler.models(), f.params);
  const SimulationSummary s = summarize(out, report.delta_hat);
  EXPECT_EQ(s.realizations, 500u);
  const double min_player = *std::min_element(s.per_player_profit_prob.begin(), s.per_player_profit_prob.end());
  EXPECT_LE(s.joint_profit_prob, min_player);
  EXPECT_EQ(s.containment_failures, 0u);
  EXPECT_LE(s.empirical_stability_freq, s.joint_profit_prob);
  EXPECT_EQ(s.payoff.size(), 4u);
  EXPECT_EQ(s.payback_slots.count + s.payback_censored, 500u);
}

TEST(Summary, AllProfitableGivesOnes) {
  RealizationOutcome o;
  o.shapley = {1.0, 2.0};
  o.deviations = {0.0, 0.0};
  const std::vector<RealizationOutcome> out(3, o);
  const ProfitProbabilities p = profitability_probabilities(out);
  EXPECT_EQ(p.joint, 1.0);
  EXPECT_EQ(p.per_player, (std::vector<double>{1.0, 1.0}));
}

}  // namespace
}  // namespace coinvest
