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

#ifndef COINVEST_ECONOMICS_HPP
#define COINVEST_ECONOMICS_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace coinvest {

/// Prices, horizon and revenue parameters of one co-investment game.
///
/// Money is in dollars, capacity in vcores, time in hours. `benefit` is
/// indexed by player; entry 0 belongs to the InP and must be 0.
struct EconomicParams {
  double capacity_price = 0.0;     ///< d, $/vcore
  double maintenance_price = 0.0;  ///< d', $/(hour vcore)
  double investment_hours = 0.0;   ///< I
  double slot_hours = 1.0;         ///< slot length
  std::size_t horizon = 0;         ///< number of slots, horizon * slot_hours == I
  std::vector<double> benefit;     ///< beta_i, $/request
  double saturation = 0.0;         ///< xi, 1/vcore

  /// d + d' I: marginal cost of one vcore over the whole horizon.
  double unit_cost() const { return capacity_price + maintenance_price * investment_hours; }
  int players() const { return static_cast<int>(benefit.size()); }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (!(capacity_price >= 0.0)) fail("capacity_price must be >= 0");
    if (!(maintenance_price >= 0.0)) fail("maintenance_price must be >= 0");
    if (!(investment_hours > 0.0)) fail("investment_hours must be > 0");
    if (!(slot_hours > 0.0)) fail("slot_hours must be > 0");
    if (!(saturation > 0.0)) fail("saturation must be > 0");
    if (horizon < 1) fail("horizon must be at least one slot");
    if (std::abs(static_cast<double>(horizon) * slot_hours - investment_hours) >
        1e-9 * investment_hours) {
      fail("horizon * slot_hours must equal investment_hours");
    }
    if (!(unit_cost() > 0.0)) fail("capacity_price + maintenance_price * investment_hours must be > 0");
    if (benefit.size() < 2) fail("need the InP and at least one service provider");
    if (benefit[0] != 0.0) fail("the InP collects no revenue; benefit[0] must be 0");
    for (double b : benefit) {
      if (!(b >= 0.0) || !std::isfinite(b)) fail("benefit must be finite and >= 0");
    }
  }
};

/// d C + d' I C, and exactly 0 for C = 0.
inline double cost(const EconomicParams& p, double capacity) {
  if (capacity < 0.0) throw std::invalid_argument("capacity must be >= 0");
  if (capacity == 0.0) return 0.0;
  return p.capacity_price * capacity + p.maintenance_price * p.investment_hours * capacity;
}

/// Revenue beta l (1 - e^{-xi h}) of serving `load` requests on `share` vcores.
inline double utility(double benefit, double saturation, double load, double share) {
  if (load < 0.0 || share < 0.0 || benefit < 0.0) {
    throw std::invalid_argument("utility inputs must be nonnegative");
  }
  return benefit * load * -std::expm1(-saturation * share);
}

}  // namespace coinvest

#endif  // COINVEST_ECONOMICS_HPP
