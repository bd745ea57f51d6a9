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

#ifndef COINVEST_LP_HPP
#define COINVEST_LP_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace coinvest {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;      ///< primal solution
  std::vector<double> duals;  ///< one multiplier per equality row
};

/// Dense two-phase primal simplex for
///
///     minimize c'x  subject to  A x = b,  x >= 0
///
/// with Bland's rule. Meant for the few-hundred-column programs that arise
/// from coalition enumeration; no sparsity, no presolve.
class DenseSimplex {
 public:
  DenseSimplex(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c,
               double tolerance = 1e-10)
      : rows_(a.size()), cols_(c.size()), tol_(tolerance) {
    if (b.size() != rows_) throw std::invalid_argument("row count of A and b differ");
    for (const auto& r : a) {
      if (r.size() != cols_) throw std::invalid_argument("column count of A and c differ");
    }
    // Tableau columns: structural, then one artificial per row, then rhs.
    width_ = cols_ + rows_ + 1;
    tab_.assign((rows_ + 1) * width_, 0.0);
    sign_.assign(rows_, 1.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (b[i] < 0.0) sign_[i] = -1.0;
      for (std::size_t j = 0; j < cols_; ++j) at(i, j) = sign_[i] * a[i][j];
      at(i, cols_ + i) = 1.0;
      at(i, width_ - 1) = sign_[i] * b[i];
    }
    cost_ = std::move(c);
    basis_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) basis_[i] = cols_ + i;
  }

  LpResult solve(int max_iterations = 10000) {
    LpResult result;
    // Phase I: minimize the sum of artificials.
    std::vector<double> phase1(cols_ + rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) phase1[cols_ + i] = 1.0;
    price(phase1);
    LpStatus st = iterate(cols_ + rows_, max_iterations);
    if (st != LpStatus::kOptimal) {
      result.status = st;
      return result;
    }
    if (-at(rows_, width_ - 1) > tol_ * std::max(1.0, rhs_scale())) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    drive_out_artificials();

    // Phase II on the structural columns only.
    std::vector<double> phase2(cols_ + rows_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) phase2[j] = cost_[j];
    price(phase2);
    st = iterate(cols_, max_iterations);
    if (st != LpStatus::kOptimal) {
      result.status = st;
      return result;
    }

    result.status = LpStatus::kOptimal;
    result.x.assign(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) result.x[basis_[i]] = at(i, width_ - 1);
    }
    result.objective = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) result.objective += cost_[j] * result.x[j];
    // Reduced cost of artificial i is -pi_i (its phase II cost is 0).
    result.duals.assign(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) result.duals[i] = -at(rows_, cols_ + i) * sign_[i];
    return result;
  }

 private:
  double& at(std::size_t r, std::size_t c) { return tab_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return tab_[r * width_ + c]; }

  double rhs_scale() const {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s = std::max(s, std::abs(at(i, width_ - 1)));
    return s;
  }

  // Objective row = costs minus c_B B^-1 A, rhs cell = -c_B x_B.
  void price(const std::vector<double>& costs) {
    for (std::size_t j = 0; j + 1 < width_; ++j) at(rows_, j) = costs[j];
    at(rows_, width_ - 1) = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double cb = costs[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(rows_, j) -= cb * at(i, j);
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(row, col);
    for (std::size_t j = 0; j < width_; ++j) at(row, j) /= p;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double f = at(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(i, j) -= f * at(row, j);
    }
    basis_[row] = col;
  }

  LpStatus iterate(std::size_t enterable, int max_iterations) {
    for (int it = 0; it < max_iterations; ++it) {
      std::size_t enter = enterable;
      for (std::size_t j = 0; j < enterable; ++j) {
        if (at(rows_, j) < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter == enterable) return LpStatus::kOptimal;
      std::size_t leave = rows_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        const double a = at(i, enter);
        if (a <= tol_) continue;
        const double ratio = at(i, width_ - 1) / a;
        if (leave == rows_ || ratio < best - tol_ ||
            (std::abs(ratio - best) <= tol_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == rows_) return LpStatus::kUnbounded;
      pivot(leave, enter);
    }
    return LpStatus::kIterationLimit;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) continue;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (std::abs(at(i, j)) > tol_) {
          pivot(i, j);
          break;
        }
      }
      // A row with no structural entry is redundant; its artificial stays at 0.
    }
  }

  std::size_t rows_, cols_, width_ = 0;
  double tol_;
  std::vector<double> tab_;
  std::vector<double> sign_;
  std::vector<double> cost_;
  std::vector<std::size_t> basis_;
};

}  // namespace coinvest

#endif  // COINVEST_LP_HPP
