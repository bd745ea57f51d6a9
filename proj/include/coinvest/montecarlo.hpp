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

#ifndef COINVEST_MONTECARLO_HPP
#define COINVEST_MONTECARLO_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coinvest/economics.hpp"
#include "coinvest/game.hpp"
#include "coinvest/parallel.hpp"
#include "coinvest/random.hpp"
#include "coinvest/traffic.hpp"

namespace coinvest {

enum class PaymentMode {
  kExAnte,  ///< p_i = expected collected revenue - nominal Shapley payoff
  kExPost,  ///< p_i = realized collected revenue - realized Shapley payoff
};

/// Upfront payments; both modes sum to Cost(I, C*_N) by Shapley efficiency.
inline std::vector<double> payments(PaymentMode mode, std::span<const double> expected_collected,
                                    std::span<const double> nominal_shapley,
                                    std::span<const double> collected,
                                    std::span<const double> realized_shapley) {
  const std::size_t n = collected.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = mode == PaymentMode::kExAnte ? expected_collected[i] - nominal_shapley[i]
                                          : collected[i] - realized_shapley[i];
  }
  return out;
}

struct RealizationOutcome {
  std::size_t omega = 0;
  std::optional<LoadMatrix> loads;     ///< kept only on request
  std::vector<double> realized_values;  ///< v_omega(S) by coalition mask
  std::vector<double> collected;        ///< sum_t u_i^t under the grand plan
  std::vector<double> shapley;          ///< x_{i,omega}
  std::vector<double> deviations;       ///< z_{i,omega,N}
  std::vector<double> payments;
  std::vector<double> rewards;          ///< x + p
  std::optional<std::size_t> payback_slot;  ///< slots elapsed until revenue covers cost
};

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulationOptions {
  PaymentMode payment_mode = PaymentMode::kExPost;
  unsigned threads = 1;
  bool keep_loads = false;
};

/// Monte Carlo over load realizations with every coalition's nominal plan held fixed.
///
/// Each realization is a set of dot products against precomputed weights
/// beta_i (1 - e^{-xi h*_{i,S}^t}), so the cost per realization is linear in
/// horizon times coalition membership.
class Simulator {
 public:
  Simulator(const LoadSampler& sampler, const EconomicParams& params, const ValueTable& table)
      : sampler_(sampler), params_(params), players_(params.players()) {
    if (sampler.players() != static_cast<std::size_t>(players_) || sampler.horizon() != params.horizon) {
      throw std::invalid_argument("sampler and economic parameters disagree on dimensions");
    }
    nominal_shapley_ = shapley(table.nominal);
    const std::size_t count = coalition_count(players_);
    coalitions_.resize(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
      const AllocationPlan& plan = table.plans[mask];
      auto& c = coalitions_[mask];
      c.cost = cost(params, plan.capacity);
      if (!plan.coalition.has_inp()) continue;
      for (std::size_t r = 0; r < plan.members.size(); ++r) {
        const auto i = static_cast<std::size_t>(plan.members[r]);
        std::vector<double> w(params.horizon);
        for (std::size_t t = 0; t < params.horizon; ++t) {
          w[t] = params.benefit[i] * -std::expm1(-params.saturation * plan.shares(r, t));
        }
        c.members.push_back(i);
        c.weights.push_back(std::move(w));
      }
    }
    const LoadMatrix expected = sampler.expected();
    expected_collected_ = collected_under_grand(expected);
  }

  const std::vector<double>& nominal_shapley() const { return nominal_shapley_; }
  const std::vector<double>& expected_collected() const { return expected_collected_; }
  double grand_cost() const { return coalitions_.back().cost; }

  RealizationOutcome evaluate(std::size_t omega, LoadMatrix loads, PaymentMode mode,
                              bool keep_loads) const {
    RealizationOutcome out;
    out.omega = omega;
    const std::size_t count = coalitions_.size();
    out.realized_values.assign(count, 0.0);
    for (std::size_t mask = 0; mask < count; ++mask) {
      const auto& c = coalitions_[mask];
      double revenue = 0.0;
      for (std::size_t k = 0; k < c.members.size(); ++k) revenue += dot(c.weights[k], loads.row(c.members[k]));
      out.realized_values[mask] = revenue - c.cost;
    }
    out.shapley = shapley(TuGame(players_, out.realized_values));
    out.collected = collected_under_grand(loads);
    out.deviations.resize(out.collected.size());
    for (std::size_t i = 0; i < out.collected.size(); ++i) {
      out.deviations[i] = out.collected[i] - expected_collected_[i];
    }
    out.payments = payments(mode, expected_collected_, nominal_shapley_, out.collected, out.shapley);
    out.rewards.resize(out.shapley.size());
    for (std::size_t i = 0; i < out.shapley.size(); ++i) out.rewards[i] = out.shapley[i] + out.payments[i];
    out.payback_slot = payback(loads);
    check_invariants(out);
    if (keep_loads) out.loads = std::move(loads);
    return out;
  }

  /// Realization omega draws its loads from derive_seed(master_seed, omega).
  std::vector<RealizationOutcome> simulate(std::size_t realizations, std::uint64_t master_seed,
                                           const SimulationOptions& opts = {}) const {
    if (realizations < 1) throw std::invalid_argument("need at least one realization");
    std::vector<RealizationOutcome> out(realizations);
    parallel_for(realizations, opts.threads, [&](std::size_t omega) {
      LoadMatrix loads = sampler_.sample(derive_seed(master_seed, omega));
      out[omega] = evaluate(omega, std::move(loads), opts.payment_mode, opts.keep_loads);
    });
    return out;
  }

 private:
  struct CoalitionWeights {
    double cost = 0.0;
    std::vector<std::size_t> members;
    std::vector<std::vector<double>> weights;
  };

  static double dot(const std::vector<double>& w, std::span<const double> l) {
    double s = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t) s += w[t] * l[t];
    return s;
  }

  std::vector<double> collected_under_grand(const LoadMatrix& loads) const {
    std::vector<double> out(static_cast<std::size_t>(players_), 0.0);
    const auto& g = coalitions_.back();
    for (std::size_t k = 0; k < g.members.size(); ++k) out[g.members[k]] = dot(g.weights[k], loads.row(g.members[k]));
    return out;
  }

  std::optional<std::size_t> payback(const LoadMatrix& loads) const {
    const auto& g = coalitions_.back();
    if (g.cost <= 0.0) return 0;
    double cumulative = 0.0;
    for (std::size_t t = 0; t < params_.horizon; ++t) {
      for (std::size_t k = 0; k < g.members.size(); ++k) cumulative += g.weights[k][t] * loads(g.members[k], t);
      if (cumulative >= g.cost) return t + 1;
    }
    return std::nullopt;
  }

  void check_invariants(const RealizationOutcome& o) const {
    const double total_collected = std::accumulate(o.collected.begin(), o.collected.end(), 0.0);
    const double scale = std::max({1.0, total_collected, grand_cost()});
    auto near = [scale](double a, double b) { return std::abs(a - b) <= 1e-9 * scale; };
    const double sx = std::accumulate(o.shapley.begin(), o.shapley.end(), 0.0);
    const double sp = std::accumulate(o.payments.begin(), o.payments.end(), 0.0);
    const double sr = std::accumulate(o.rewards.begin(), o.rewards.end(), 0.0);
    if (!near(sx, o.realized_values.back())) {
      throw InvariantViolation("Shapley payoffs do not sum to the realized grand value");
    }
    if (!near(sp, grand_cost())) throw InvariantViolation("payments do not cover the cost");
    if (!near(sr, total_collected)) throw InvariantViolation("rewards do not sum to collected revenue");
  }

  const LoadSampler& sampler_;
  EconomicParams params_;
  int players_;
  std::vector<double> nominal_shapley_;
  std::vector<double> expected_collected_;
  std::vector<CoalitionWeights> coalitions_;
};

struct QuantileSummary {
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0, mean = 0.0;
  std::size_t count = 0;
};

/// Linear-interpolation quantiles of a sample.
inline QuantileSummary summarize_values(std::vector<double> v) {
  QuantileSummary q;
  q.count = v.size();
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&v](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  q.min = v.front();
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.max = v.back();
  q.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return q;
}

struct ProfitProbabilities {
  std::vector<double> per_player;
  double joint = 0.0;
};

/// Fraction of realizations with x_{i,omega} >= 0, per player and for all at once.
inline ProfitProbabilities profitability_probabilities(std::span<const RealizationOutcome> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("need at least one realization");
  const std::size_t n = outcomes.front().shapley.size();
  ProfitProbabilities p;
  p.per_player.assign(n, 0.0);
  std::size_t joint = 0;
  for (const auto& o : outcomes) {
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (o.shapley[i] >= 0.0) {
        p.per_player[i] += 1.0;
      } else {
        all = false;
      }
    }
    if (all) ++joint;
  }
  const auto total = static_cast<double>(outcomes.size());
  for (double& v : p.per_player) v /= total;
  p.joint = static_cast<double>(joint) / total;
  return p;
}

/// Every player's revenue deviation strictly inside the threshold.
inline bool within_threshold(const RealizationOutcome& o, double delta) {
  return std::all_of(o.deviations.begin(), o.deviations.end(),
                     [delta](double z) { return std::abs(z) < delta; });
}

inline double empirical_stability_frequency(std::span<const RealizationOutcome> outcomes, double delta) {
  if (outcomes.empty()) throw std::invalid_argument("need at least one realization");
  const auto hits = std::count_if(outcomes.begin(), outcomes.end(),
                                  [delta](const auto& o) { return within_threshold(o, delta); });
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

/// Realizations that are within the threshold with v_omega(N) > 0 but where
/// some player's Shapley payoff is negative. Empty when the stable set is
/// contained in the profitable set.
inline std::vector<std::size_t> containment_failures(std::span<const RealizationOutcome> outcomes,
                                                     double delta) {
  std::vector<std::size_t> out;
  for (const auto& o : outcomes) {
    if (!within_threshold(o, delta) || !(o.realized_values.back() > 0.0)) continue;
    const bool profitable =
        std::all_of(o.shapley.begin(), o.shapley.end(), [](double x) { return x >= 0.0; });
    if (!profitable) out.push_back(o.omega);
  }
  return out;
}

inline std::vector<std::optional<std::size_t>> payback_distribution(
    std::span<const RealizationOutcome> outcomes) {
  std::vector<std::optional<std::size_t>> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) out.push_back(o.payback_slot);
  return out;
}

struct SimulationSummary {
  std::size_t realizations = 0;
  std::vector<double> per_player_profit_prob;
  double joint_profit_prob = 0.0;
  double empirical_stability_freq = 0.0;
  double delta_hat = 0.0;
  std::vector<QuantileSummary> payoff;
  std::vector<QuantileSummary> payment;
  std::vector<QuantileSummary> reward;
  std::vector<QuantileSummary> collected;
  QuantileSummary payback_slots;  ///< over realizations that pay back
  std::size_t payback_censored = 0;
  std::size_t containment_failures = 0;
};

inline SimulationSummary summarize(std::span<const RealizationOutcome> outcomes, double delta_hat) {
  SimulationSummary s;
  s.realizations = outcomes.size();
  const ProfitProbabilities p = profitability_probabilities(outcomes);
  s.per_player_profit_prob = p.per_player;
  s.joint_profit_prob = p.joint;
  s.delta_hat = delta_hat;
  s.empirical_stability_freq = empirical_stability_frequency(outcomes, delta_hat);
  const std::size_t n = outcomes.front().shapley.size();
  auto column = [&](auto member, std::size_t i) {
    std::vector<double> v;
    v.reserve(outcomes.size());
    for (const auto& o : outcomes) v.push_back((o.*member)[i]);
    return summarize_values(std::move(v));
  };
  for (std::size_t i = 0; i < n; ++i) {
    s.payoff.push_back(column(&RealizationOutcome::shapley, i));
    s.payment.push_back(column(&RealizationOutcome::payments, i));
    s.reward.push_back(column(&RealizationOutcome::rewards, i));
    s.collected.push_back(column(&RealizationOutcome::collected, i));
  }
  std::vector<double> slots;
  for (const auto& o : outcomes) {
    if (o.payback_slot) {
      slots.push_back(static_cast<double>(*o.payback_slot));
    } else {
      ++s.payback_censored;
    }
  }
  s.payback_slots = summarize_values(std::move(slots));
  s.containment_failures = containment_failures(outcomes, delta_hat).size();
  return s;
}

}  // namespace coinvest

#endif  // COINVEST_MONTECARLO_HPP
