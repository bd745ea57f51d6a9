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

#ifndef COINVEST_ALLOCATION_HPP
#define COINVEST_ALLOCATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coinvest/economics.hpp"
#include "coinvest/player_set.hpp"
#include "coinvest/slot_matrix.hpp"

namespace coinvest {

/// Installed capacity and per-slot shares of one coalition.
///
/// `shares` has one row per service provider in the coalition (in increasing
/// player order); the InP and non-members implicitly hold 0.
struct AllocationPlan {
  PlayerSet coalition;
  double capacity = 0.0;
  std::vector<int> members;
  SlotMatrix shares;
  double objective = 0.0;

  double share(int player, std::size_t slot) const {
    for (std::size_t r = 0; r < members.size(); ++r) {
      if (members[r] == player) return shares(r, slot);
    }
    return 0.0;
  }
  std::size_t horizon() const { return shares.slots(); }
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_inputs(PlayerSet coalition, const SlotMatrix& loads, const EconomicParams& p) {
  if (coalition.players() != p.players()) {
    throw std::invalid_argument("coalition and parameters disagree on the player count");
  }
  if (loads.rows() != static_cast<std::size_t>(p.players())) {
    throw std::invalid_argument("load matrix must have one row per player");
  }
  if (loads.slots() != p.horizon) {
    throw std::invalid_argument("load matrix horizon differs from the economic horizon");
  }
}

inline std::vector<int> sp_members(PlayerSet coalition) {
  std::vector<int> out;
  for (int i = 1; i < coalition.players(); ++i) {
    if (coalition.contains(i)) out.push_back(i);
  }
  return out;
}

inline AllocationPlan zero_plan(PlayerSet coalition, std::size_t horizon) {
  AllocationPlan plan;
  plan.coalition = coalition;
  plan.members = sp_members(coalition);
  plan.shares = SlotMatrix(plan.members.size(), horizon);
  return plan;
}

inline double expected_revenue(const AllocationPlan& plan, const SlotMatrix& loads,
                               const EconomicParams& p) {
  double total = 0.0;
  for (std::size_t r = 0; r < plan.members.size(); ++r) {
    const int i = plan.members[r];
    const double beta = p.benefit[static_cast<std::size_t>(i)];
    for (std::size_t t = 0; t < plan.horizon(); ++t) {
      total += utility(beta, p.saturation, loads(static_cast<std::size_t>(i), t), plan.shares(r, t));
    }
  }
  return total;
}

}  // namespace detail

/// Sum of expected utilities minus cost for a fixed plan.
inline double plan_objective(const AllocationPlan& plan, const SlotMatrix& expected,
                             const EconomicParams& p) {
  return detail::expected_revenue(plan, expected, p) - cost(p, plan.capacity);
}

/// Interior KKT solution in closed form.
///
/// Returns std::nullopt when the formula is outside its validity domain: a
/// member with load that is zero at some but not all slots, C* <= 0, or a
/// negative share. Coalitions without the InP, or whose members all carry
/// zero load, get the zero plan.
inline std::optional<AllocationPlan> optimal_plan_closed_form(PlayerSet coalition,
                                                              const SlotMatrix& expected,
                                                              const EconomicParams& p) {
  detail::check_inputs(coalition, expected, p);
  const std::size_t horizon = p.horizon;
  AllocationPlan plan = detail::zero_plan(coalition, horizon);
  if (!coalition.has_inp()) return plan;

  std::vector<int> active;
  for (int i : plan.members) {
    const double beta = p.benefit[static_cast<std::size_t>(i)];
    std::size_t positive = 0;
    for (std::size_t t = 0; t < horizon; ++t) {
      if (beta * expected(static_cast<std::size_t>(i), t) > 0.0) ++positive;
    }
    if (positive == horizon) {
      active.push_back(i);
    } else if (positive != 0) {
      return std::nullopt;
    }
  }
  if (active.empty()) return plan;

  const double xi = p.saturation;
  const double k = static_cast<double>(active.size());
  // mean over active SPs of ln(beta_i l_i^t), per slot
  std::vector<double> mean_log(horizon, 0.0);
  double geo_sum = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    double s = 0.0;
    for (int i : active) {
      s += std::log(p.benefit[static_cast<std::size_t>(i)] * expected(static_cast<std::size_t>(i), t));
    }
    mean_log[t] = s / k;
    geo_sum += xi * std::exp(mean_log[t]);
  }
  const double capacity = k / xi * std::log(geo_sum / p.unit_cost());
  if (!(capacity > 0.0) || !std::isfinite(capacity)) return std::nullopt;

  plan.capacity = capacity;
  for (std::size_t r = 0; r < plan.members.size(); ++r) {
    const int i = plan.members[r];
    if (std::find(active.begin(), active.end(), i) == active.end()) continue;
    for (std::size_t t = 0; t < horizon; ++t) {
      const double h =
          capacity / k +
          (std::log(p.benefit[static_cast<std::size_t>(i)] * expected(static_cast<std::size_t>(i), t)) -
           mean_log[t]) /
              xi;
      if (h < 0.0) return std::nullopt;
      plan.shares(r, t) = h;
    }
  }
  plan.objective = plan_objective(plan, expected, p);
  return plan;
}

namespace detail {

// Per-slot water-filling state: log marginal revenue at zero share,
// ln(xi beta_i l_i^t), sorted decreasingly, with prefix sums.
class WaterFilling {
 public:
  WaterFilling(const std::vector<int>& members, const SlotMatrix& expected, const EconomicParams& p)
      : xi_(p.saturation), horizon_(p.horizon), offset_(p.horizon + 1, 0) {
    std::vector<std::pair<double, std::size_t>> slot_logs;
    for (std::size_t t = 0; t < horizon_; ++t) {
      slot_logs.clear();
      for (std::size_t r = 0; r < members.size(); ++r) {
        const auto i = static_cast<std::size_t>(members[r]);
        const double w = p.saturation * p.benefit[i] * expected(i, t);
        if (w > 0.0) slot_logs.emplace_back(std::log(w), r);
      }
      std::sort(slot_logs.begin(), slot_logs.end(),
                [](const auto& a, const auto& b) { return a.first > b.first; });
      double acc = 0.0;
      for (const auto& [lw, r] : slot_logs) {
        acc += lw;
        log_w_.push_back(lw);
        prefix_.push_back(acc);
        row_.push_back(r);
      }
      offset_[t + 1] = log_w_.size();
    }
    max_active_ = 0;
    for (std::size_t t = 0; t < horizon_; ++t) {
      max_active_ = std::max(max_active_, offset_[t + 1] - offset_[t]);
    }
  }

  std::size_t max_active() const { return max_active_; }

  struct Level {
    double log_lambda = -std::numeric_limits<double>::infinity();
    std::size_t active = 0;
  };

  // Common multiplier at slot t when the shares must sum to `capacity`.
  Level level(std::size_t t, double capacity) const {
    const std::size_t b = offset_[t];
    const std::size_t n = offset_[t + 1] - b;
    if (n == 0) return {};
    // Grow the active set while the next SP's zero-share marginal exceeds
    // the current level.
    std::size_t a = 1;
    double mu = prefix_[b] - xi_ * capacity;
    while (a < n && log_w_[b + a] > mu) {
      ++a;
      mu = (prefix_[b + a - 1] - xi_ * capacity) / static_cast<double>(a);
    }
    return {mu, a};
  }

  // Sum over slots of lambda_t and its derivative in capacity.
  std::pair<double, double> multiplier_sum(double capacity) const {
    double g = 0.0, dg = 0.0;
    for (std::size_t t = 0; t < horizon_; ++t) {
      const Level lv = level(t, capacity);
      if (lv.active == 0) continue;
      const double lambda = std::exp(lv.log_lambda);
      g += lambda;
      dg -= xi_ * lambda / static_cast<double>(lv.active);
    }
    return {g, dg};
  }

  void fill_shares(double capacity, SlotMatrix& shares) const {
    for (std::size_t t = 0; t < horizon_; ++t) {
      const Level lv = level(t, capacity);
      const std::size_t b = offset_[t];
      for (std::size_t j = 0; j < lv.active; ++j) {
        shares(row_[b + j], t) = std::max(0.0, (log_w_[b + j] - lv.log_lambda) / xi_);
      }
    }
  }

 private:
  double xi_;
  std::size_t horizon_;
  std::vector<std::size_t> offset_;
  std::vector<double> log_w_;
  std::vector<double> prefix_;
  std::vector<std::size_t> row_;
  std::size_t max_active_ = 0;
};

}  // namespace detail

/// Iteration cap for the outer capacity search.
inline constexpr int kMaxSolverIterations = 200;

/// Solves the concave allocation program directly from its KKT system.
///
/// For a trial capacity C each slot is water-filled exactly: shares
/// max(0, ln(xi beta_i l_i^t / lambda_t) / xi) summing to C. The capacity is
/// then the root of sum_t lambda_t(C) = d + d' I, a strictly decreasing
/// function of C, found by Newton steps safeguarded by bisection. When even
/// C -> 0+ leaves the sum below the marginal cost, nothing is installed.
inline AllocationPlan optimal_plan_numeric(PlayerSet coalition, const SlotMatrix& expected,
                                           const EconomicParams& p) {
  detail::check_inputs(coalition, expected, p);
  AllocationPlan plan = detail::zero_plan(coalition, p.horizon);
  if (!coalition.has_inp() || plan.members.empty()) return plan;

  const detail::WaterFilling wf(plan.members, expected, p);
  if (wf.max_active() == 0) return plan;

  const double target = p.unit_cost();
  const double log_target = std::log(target);
  const auto [g0, dg0] = wf.multiplier_sum(0.0);
  if (g0 <= target) return plan;

  double lo = 0.0;
  double hi = static_cast<double>(wf.max_active()) / p.saturation * std::log(g0 / target);
  // The bound above is analytic; widen if round-off leaves g(hi) > target.
  for (int i = 0; i < 64 && wf.multiplier_sum(hi).first > target; ++i) hi *= 2.0;

  double c = 0.5 * (lo + hi);
  bool converged = false;
  for (int iter = 0; iter < kMaxSolverIterations; ++iter) {
    const auto [g, dg] = wf.multiplier_sum(c);
    const double residual = std::log(g) - log_target;  // decreasing in c
    if (residual > 0.0) {
      lo = c;
    } else {
      hi = c;
    }
    if (std::abs(g - target) <= 1e-14 * target || hi - lo <= 1e-15 * std::max(1.0, hi)) {
      converged = true;
      break;
    }
    // Newton on ln g(c) - ln K; fall back to bisection when it leaves the bracket.
    double next = c - residual / (dg / g);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    c = next;
  }
  if (!converged) {
    throw SolverError("capacity search did not converge within " +
                      std::to_string(kMaxSolverIterations) + " iterations");
  }

  plan.capacity = c;
  wf.fill_shares(c, plan.shares);
  plan.objective = plan_objective(plan, expected, p);
  return plan;
}

/// Closed form when applicable, numeric KKT solver otherwise.
inline AllocationPlan optimal_plan(PlayerSet coalition, const SlotMatrix& expected,
                                   const EconomicParams& p) {
  if (auto plan = optimal_plan_closed_form(coalition, expected, p)) return *std::move(plan);
  return optimal_plan_numeric(coalition, expected, p);
}

}  // namespace coinvest

#endif  // COINVEST_ALLOCATION_HPP
