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

#ifndef COINVEST_GAME_HPP
#define COINVEST_GAME_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "coinvest/allocation.hpp"
#include "coinvest/economics.hpp"
#include "coinvest/lp.hpp"
#include "coinvest/parallel.hpp"
#include "coinvest/player_set.hpp"
#include "coinvest/slot_matrix.hpp"
#include "coinvest/traffic.hpp"

namespace coinvest {

/// Transferable-utility game: one value per coalition, indexed by bitmask.
struct TuGame {
  int players = 0;
  std::vector<double> values;

  TuGame() = default;
  TuGame(int n, std::vector<double> v) : players(n), values(std::move(v)) { validate(); }

  double value(PlayerSet s) const { return values[s.index()]; }
  double value(std::size_t mask) const { return values[mask]; }
  PlayerSet grand() const { return PlayerSet::grand(players); }
  double grand_value() const { return values.back(); }

  void validate() const {
    PlayerSet::check_count(players);
    if (values.size() != coalition_count(players)) {
      throw std::invalid_argument("game needs a value for all " +
                                  std::to_string(coalition_count(players)) + " coalitions, got " +
                                  std::to_string(values.size()));
    }
  }
};

/// Nominal game together with the plan that produced each value.
struct ValueTable {
  TuGame nominal;
  std::vector<AllocationPlan> plans;

  const AllocationPlan& plan(PlayerSet s) const { return plans[s.index()]; }
  const AllocationPlan& grand_plan() const { return plans.back(); }
};

/// Solves the allocation program for every coalition and records v(S).
inline ValueTable build_value_table(int players, const LoadMatrix& expected, const EconomicParams& p,
                                    unsigned threads = 1) {
  PlayerSet::check_count(players);
  p.validate();
  if (p.players() != players) throw std::invalid_argument("benefit vector length != player count");
  const std::size_t count = coalition_count(players);
  ValueTable table;
  table.plans.resize(count);
  std::vector<double> values(count, 0.0);
  parallel_for(count, threads, [&](std::size_t mask) {
    const PlayerSet s(static_cast<std::uint32_t>(mask), players);
    table.plans[mask] = optimal_plan(s, expected, p);
    values[mask] = table.plans[mask].objective;
  });
  table.nominal = TuGame(players, std::move(values));
  return table;
}

/// Value of S in one realization: its nominal plan evaluated at realized loads.
inline double realized_value(PlayerSet s, const AllocationPlan& plan, const LoadMatrix& realized,
                             const EconomicParams& p) {
  if (!(plan.coalition == s)) throw std::invalid_argument("plan belongs to a different coalition");
  if (realized.slots() != plan.horizon() || realized.rows() != static_cast<std::size_t>(s.players())) {
    throw std::invalid_argument("realized loads do not match the plan dimensions");
  }
  double revenue = 0.0;
  for (std::size_t r = 0; r < plan.members.size(); ++r) {
    const auto i = static_cast<std::size_t>(plan.members[r]);
    for (std::size_t t = 0; t < plan.horizon(); ++t) {
      revenue += utility(p.benefit[i], p.saturation, realized(i, t), plan.shares(r, t));
    }
  }
  return revenue - cost(p, plan.capacity);
}

/// v(S + i) - v(S).
inline double marginal_contribution(const TuGame& game, int player, PlayerSet s) {
  if (s.contains(player)) throw std::invalid_argument("player already belongs to the coalition");
  return game.value(s.with(player)) - game.value(s);
}

/// Shapley weight |S|! (n - |S| - 1)! / n! for each |S| in [0, n).
inline std::vector<double> shapley_weights(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  // 1 / (n * binom(n-1, s))
  double binom = 1.0;
  for (int s = 0; s < n; ++s) {
    w[static_cast<std::size_t>(s)] = 1.0 / (static_cast<double>(n) * binom);
    binom = binom * static_cast<double>(n - 1 - s) / static_cast<double>(s + 1);
  }
  return w;
}

/// Exact Shapley value by subset enumeration.
inline std::vector<double> shapley(const TuGame& game) {
  game.validate();
  const int n = game.players;
  const auto w = shapley_weights(n);
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  const std::size_t count = coalition_count(n);
  for (std::size_t mask = 0; mask < count; ++mask) {
    const PlayerSet s(static_cast<std::uint32_t>(mask), n);
    const double ws = w[static_cast<std::size_t>(std::min(s.size(), n - 1))];
    for (int i = 0; i < n; ++i) {
      if (s.contains(i)) continue;
      x[static_cast<std::size_t>(i)] += ws * (game.value(s.with(i)) - game.value(s));
    }
  }
  return x;
}

struct SupermodularityViolation {
  int player;
  PlayerSet smaller;  ///< R
  PlayerSet larger;   ///< S, with R a subset of S
  double gap;         ///< Delta_j(R) - Delta_j(S) > tolerance
};

/// All (j, R, S) with R subset of S subset of N\{j} and Delta_j(S) < Delta_j(R) - tolerance.
inline std::vector<SupermodularityViolation> check_supermodularity(const TuGame& game,
                                                                   double tolerance) {
  game.validate();
  const int n = game.players;
  const std::uint32_t all = game.grand().bits();
  std::vector<SupermodularityViolation> out;
  for (int j = 0; j < n; ++j) {
    const std::uint32_t jbit = std::uint32_t{1} << j;
    const std::uint32_t rest = all & ~jbit;
    // Enumerate S over subsets of rest, then R over subsets of S.
    for (std::uint32_t s = rest;; s = (s - 1) & rest) {
      const double ds = game.value(s | jbit) - game.value(s);
      for (std::uint32_t r = s;; r = (r - 1) & s) {
        const double dr = game.value(r | jbit) - game.value(r);
        if (ds < dr - tolerance) out.push_back({j, PlayerSet(r, n), PlayerSet(s, n), dr - ds});
        if (r == 0) break;
      }
      if (s == 0) break;
    }
  }
  return out;
}

/// Efficiency within tolerance and x(S) >= v(S) - tolerance for every proper S.
inline bool check_core(const TuGame& game, std::span<const double> allocation, double tolerance) {
  game.validate();
  if (allocation.size() != static_cast<std::size_t>(game.players)) {
    throw std::invalid_argument("allocation needs one entry per player");
  }
  const double total = std::accumulate(allocation.begin(), allocation.end(), 0.0);
  if (std::abs(total - game.grand_value()) > tolerance) return false;
  const std::size_t count = coalition_count(game.players);
  for (std::size_t mask = 1; mask + 1 < count; ++mask) {
    double xs = 0.0;
    for (int i = 0; i < game.players; ++i) {
      if ((mask >> i) & 1u) xs += allocation[static_cast<std::size_t>(i)];
    }
    if (xs < game.value(mask) - tolerance) return false;
  }
  return true;
}

/// Smallest excess x(S) - v(S) over nonempty proper coalitions.
inline double min_excess(const TuGame& game, std::span<const double> allocation) {
  const std::size_t count = coalition_count(game.players);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 1; mask + 1 < count; ++mask) {
    double xs = 0.0;
    for (int i = 0; i < game.players; ++i) {
      if ((mask >> i) & 1u) xs += allocation[static_cast<std::size_t>(i)];
    }
    best = std::min(best, xs - game.value(mask));
  }
  return best;
}

/// Shapley-anchored stability value: min over nonempty proper S of x(S) - v(S).
inline double stability_value_hat(const TuGame& game, std::span<const double> shapley_value) {
  game.validate();
  if (shapley_value.size() != static_cast<std::size_t>(game.players)) {
    throw std::invalid_argument("allocation needs one entry per player");
  }
  return min_excess(game, shapley_value);
}

struct StabilityValue {
  double value = 0.0;
  std::vector<double> allocation;  ///< an efficient allocation attaining it
};

/// Exact max over efficient x of min_S (x(S) - v(S)).
///
/// Solved through its dual, a balanced-collection program over the 2^n - 2
/// proper coalitions:
///
///     minimize  mu v(N) - sum_S y_S v(S)
///     s.t.      sum_{S containing i} y_S = mu   for each player i
///               sum_S y_S = 1,   y, mu >= 0
///
/// The maximizing allocation is read back from the row multipliers.
inline StabilityValue stability_value_lp(const TuGame& game) {
  game.validate();
  const int n = game.players;
  if (n > 12) throw std::invalid_argument("exact stability LP supports at most 12 players");
  const std::size_t proper = coalition_count(n) - 2;
  double scale = 0.0;
  for (double v : game.values) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return {0.0, std::vector<double>(static_cast<std::size_t>(n), 0.0)};

  const std::size_t cols = proper + 1;  // y_S for masks 1..2^n-2, then mu
  const std::size_t rows = static_cast<std::size_t>(n) + 1;
  std::vector<std::vector<double>> a(rows, std::vector<double>(cols, 0.0));
  std::vector<double> b(rows, 0.0), c(cols, 0.0);
  for (std::size_t k = 0; k < proper; ++k) {
    const std::size_t mask = k + 1;
    for (int i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) a[static_cast<std::size_t>(i)][k] = 1.0;
    }
    a[rows - 1][k] = 1.0;
    c[k] = -game.value(mask) / scale;
  }
  for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)][proper] = -1.0;
  c[proper] = game.grand_value() / scale;
  b[rows - 1] = 1.0;

  DenseSimplex lp(std::move(a), std::move(b), std::move(c));
  const LpResult res = lp.solve();
  if (res.status != LpStatus::kOptimal) {
    throw SolverError("stability LP did not reach an optimum (this indicates a bug)");
  }
  StabilityValue out;
  out.value = res.objective * scale;
  out.allocation.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    out.allocation[static_cast<std::size_t>(i)] = -res.duals[static_cast<std::size_t>(i)] * scale;
    total += out.allocation[static_cast<std::size_t>(i)];
  }
  // mu >= 0 relaxes efficiency to x(N) <= v(N); spreading the slack keeps every excess.
  const double slack = (game.grand_value() - total) / static_cast<double>(n);
  for (double& xi : out.allocation) xi += slack;
  return out;
}

struct Threshold {
  double value = 0.0;
  bool degenerate = false;  ///< v(N) <= 0: no positive threshold exists
};

/// min(v(N)/n, s / max_S(|S| + (n - 2|S|) (v(S) + s) / v(N))) for a
/// stability value s. A nonpositive denominator leaves only the first term.
inline Threshold delta_threshold(const TuGame& game, double stability) {
  game.validate();
  const double vn = game.grand_value();
  if (!(vn > 0.0)) return {0.0, true};
  const int n = game.players;
  const std::size_t count = coalition_count(n);
  double denom = -std::numeric_limits<double>::infinity();
  for (std::size_t mask = 1; mask + 1 < count; ++mask) {
    const double size = static_cast<double>(std::popcount(mask));
    const double y = (game.value(mask) + stability) / vn;
    denom = std::max(denom, size + (static_cast<double>(n) - 2.0 * size) * y);
  }
  double value = vn / static_cast<double>(n);
  if (denom > 0.0) value = std::min(value, stability / denom);
  return {std::max(0.0, value), false};
}

/// Threshold anchored on the Shapley value.
inline Threshold delta_hat(const TuGame& game, std::span<const double> shapley_value) {
  return delta_threshold(game, stability_value_hat(game, shapley_value));
}

/// Same threshold built from the exact LP stability value.
inline Threshold delta_lp(const TuGame& game) {
  return delta_threshold(game, stability_value_lp(game).value);
}

class UnboundedModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Width of the support of u_i^t under the grand-coalition plan:
/// beta_i (1 - e^{-xi h}) (l_max - l_min). Zero for the InP.
///
/// `models[i-1]` is the model of service provider i; only bounded models have
/// a finite range.
inline double utility_range(int player, std::size_t slot, const AllocationPlan& plan,
                            std::span<const LoadModel> models, const EconomicParams& p) {
  if (player == kInp) return 0.0;
  const auto& model = models[static_cast<std::size_t>(player - 1)];
  const auto* bounded = std::get_if<BoundedLoadModel>(&model);
  if (bounded == nullptr) {
    throw UnboundedModelError("utility range is undefined for the fBm model (unbounded support)");
  }
  const double spread = bounded->max_load(slot) - bounded->min_load(slot);
  const double h = plan.share(player, slot);
  return p.benefit[static_cast<std::size_t>(player)] * -std::expm1(-p.saturation * h) * spread;
}

inline SlotMatrix utility_ranges(const AllocationPlan& plan, std::span<const LoadModel> models,
                                 const EconomicParams& p) {
  const auto players = static_cast<std::size_t>(p.players());
  SlotMatrix out(players, p.horizon);
  for (std::size_t i = 1; i < players; ++i) {
    for (std::size_t t = 0; t < p.horizon; ++t) {
      out(i, t) = utility_range(static_cast<int>(i), t, plan, models, p);
    }
  }
  return out;
}

struct StabilityBound {
  std::vector<double> per_player;  ///< Hoeffding bound on P(|z_i| < delta)
  double nu = 1.0;                 ///< product of the per-player bounds
};

/// max(1 - 2 exp(-2 delta^2 / sum_t range^2), 0) per player, 1 when the
/// player's ranges are all zero; nu is their product.
inline StabilityBound stability_lower_bound(double delta, const SlotMatrix& ranges) {
  if (delta < 0.0) throw std::invalid_argument("threshold must be >= 0");
  StabilityBound out;
  out.per_player.resize(ranges.rows());
  for (std::size_t i = 0; i < ranges.rows(); ++i) {
    double sq = 0.0;
    for (double r : ranges.row(i)) sq += r * r;
    const double pi = sq == 0.0 ? 1.0 : std::max(1.0 - 2.0 * std::exp(-2.0 * delta * delta / sq), 0.0);
    out.per_player[i] = pi;
    out.nu *= pi;
  }
  return out;
}

struct StabilityReport {
  std::vector<double> shapley_expected;
  double sigma_hat = 0.0;
  double delta_hat = 0.0;
  bool degenerate = false;
  std::vector<double> per_player_bound;
  double nu_lower_bound = 0.0;
  SlotMatrix utility_ranges;
};

/// Shapley value, stability value, threshold and Hoeffding bound of the
/// grand coalition. Requires bounded load models.
inline StabilityReport analyze_stability(const ValueTable& table, std::span<const LoadModel> models,
                                         const EconomicParams& p) {
  StabilityReport r;
  r.shapley_expected = shapley(table.nominal);
  r.sigma_hat = stability_value_hat(table.nominal, r.shapley_expected);
  const Threshold th = delta_threshold(table.nominal, r.sigma_hat);
  r.delta_hat = th.value;
  r.degenerate = th.degenerate;
  r.utility_ranges = utility_ranges(table.grand_plan(), models, p);
  const StabilityBound lb = stability_lower_bound(r.delta_hat, r.utility_ranges);
  r.per_player_bound = lb.per_player;
  r.nu_lower_bound = lb.nu;
  return r;
}

}  // namespace coinvest

#endif  // COINVEST_GAME_HPP
