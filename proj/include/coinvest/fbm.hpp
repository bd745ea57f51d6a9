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

#ifndef COINVEST_FBM_HPP
#define COINVEST_FBM_HPP

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "coinvest/random.hpp"

namespace coinvest {

/// Longest fBm path (in slots) a generator will accept.
inline constexpr std::size_t kMaxFbmSlots = std::size_t{1} << 24;

enum class FbmMethod {
  kAuto,         ///< circulant embedding, Hosking if the embedding is indefinite
  kDaviesHarte,  ///< circulant embedding only; throws if indefinite
  kHosking,      ///< Durbin-Levinson recursion, O(n^2) per path
};

/// Autocovariance of unit fractional Gaussian noise at integer lag k.
inline double fgn_autocovariance(double hurst, std::size_t k) {
  const double h2 = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  if (k == 0) return 1.0;
  return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(kk - 1.0, h2));
}

/// Covariance of standard fBm at times s and t.
inline double fbm_covariance(double hurst, double s, double t) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

namespace detail {

// FFTW's planner is not re-entrant; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* plan) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
};

using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

inline FftwPlan make_forward_plan(std::size_t size) {
  std::vector<std::complex<double>> in(size), out(size);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(size), reinterpret_cast<fftw_complex*>(in.data()),
                                 reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p == nullptr) throw std::runtime_error("FFTW failed to create a plan");
  return FftwPlan(p);
}

inline void execute(const FftwPlan& plan, std::vector<std::complex<double>>& in,
                    std::vector<std::complex<double>>& out) {
  fftw_execute_dft(plan.get(), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace detail

/// Exact sampler of standard fractional Brownian motion on the slot grid
/// t = 0, 1, ..., n-1, with f(0) = 0 and Var f(t) = t^{2H}.
///
/// The spectrum of the circulant embedding is computed once at construction;
/// sample() is const and may be called concurrently with distinct generators.
class FbmGenerator {
 public:
  FbmGenerator(double hurst, std::size_t slots, FbmMethod method = FbmMethod::kAuto)
      : hurst_(hurst), slots_(slots) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
      throw std::invalid_argument("Hurst parameter must lie in (0, 1), got " + std::to_string(hurst));
    }
    if (slots < 1) throw std::invalid_argument("fBm path needs at least one slot");
    if (slots > kMaxFbmSlots) {
      throw std::length_error("fBm path of " + std::to_string(slots) + " slots exceeds the limit of " +
                              std::to_string(kMaxFbmSlots));
    }
    const std::size_t increments = slots - 1;
    if (increments == 0) {
      method_ = FbmMethod::kHosking;
      return;
    }
    if (method == FbmMethod::kHosking) {
      method_ = FbmMethod::kHosking;
      return;
    }
    if (build_embedding(increments)) {
      method_ = FbmMethod::kDaviesHarte;
    } else if (method == FbmMethod::kDaviesHarte) {
      throw std::runtime_error("circulant embedding is not nonnegative definite");
    } else {
      method_ = FbmMethod::kHosking;
    }
  }

  double hurst() const { return hurst_; }
  std::size_t slots() const { return slots_; }
  /// Method actually in use after the embedding check.
  FbmMethod method() const { return method_; }

  /// Fractional Gaussian noise: the n-1 unit-variance increments.
  std::vector<double> sample_increments(Rng& rng) const {
    const std::size_t increments = slots_ - 1;
    if (increments == 0) return {};
    return method_ == FbmMethod::kDaviesHarte ? davies_harte(rng, increments)
                                              : hosking(rng, increments);
  }

  /// One path f(0..n-1).
  std::vector<double> sample(Rng& rng) const {
    const std::vector<double> noise = sample_increments(rng);
    std::vector<double> path(slots_, 0.0);
    double acc = 0.0;
    for (std::size_t t = 1; t < slots_; ++t) {
      acc += noise[t - 1];
      path[t] = acc;
    }
    return path;
  }

 private:
  bool build_embedding(std::size_t increments) {
    half_ = std::bit_ceil(increments);
    const std::size_t size = 2 * half_;
    std::vector<std::complex<double>> row(size), eig(size);
    for (std::size_t k = 0; k <= half_; ++k) row[k] = fgn_autocovariance(hurst_, k);
    for (std::size_t k = 1; k < half_; ++k) row[size - k] = row[k];
    plan_ = detail::make_forward_plan(size);
    detail::execute(plan_, row, eig);

    double largest = 0.0;
    for (const auto& e : eig) largest = std::max(largest, e.real());
    scale_.assign(half_ + 1, 0.0);
    const double n = static_cast<double>(size);
    for (std::size_t k = 0; k <= half_; ++k) {
      double lambda = eig[k].real();
      if (lambda < -1e-10 * largest) return false;
      lambda = std::max(lambda, 0.0);
      // k = 0 and k = half carry one real normal; the rest a complex pair.
      scale_[k] = (k == 0 || k == half_) ? std::sqrt(lambda / n) : std::sqrt(lambda / (2.0 * n));
    }
    return true;
  }

  std::vector<double> davies_harte(Rng& rng, std::size_t increments) const {
    const std::size_t size = 2 * half_;
    std::normal_distribution<double> normal;
    std::vector<std::complex<double>> w(size), x(size);
    w[0] = scale_[0] * normal(rng);
    w[half_] = scale_[half_] * normal(rng);
    for (std::size_t k = 1; k < half_; ++k) {
      const double re = normal(rng);
      const double im = normal(rng);
      w[k] = scale_[k] * std::complex<double>(re, im);
      w[size - k] = std::conj(w[k]);
    }
    detail::execute(plan_, w, x);
    std::vector<double> out(increments);
    for (std::size_t j = 0; j < increments; ++j) out[j] = x[j].real();
    return out;
  }

  // Durbin-Levinson: conditional mean/variance of each increment given the past.
  std::vector<double> hosking(Rng& rng, std::size_t increments) const {
    std::normal_distribution<double> normal;
    std::vector<double> gamma(increments + 1);
    for (std::size_t k = 0; k <= increments; ++k) gamma[k] = fgn_autocovariance(hurst_, k);

    std::vector<double> out(increments);
    std::vector<double> phi, prev;
    phi.reserve(increments);
    prev.reserve(increments);
    double variance = 1.0;
    out[0] = normal(rng);
    for (std::size_t i = 1; i < increments; ++i) {
      double num = gamma[i];
      for (std::size_t j = 0; j < phi.size(); ++j) num -= phi[j] * gamma[i - 1 - j];
      const double reflection = num / variance;
      prev = phi;
      phi.resize(i);
      for (std::size_t j = 0; j + 1 < i; ++j) phi[j] = prev[j] - reflection * prev[i - 2 - j];
      phi[i - 1] = reflection;
      variance *= (1.0 - reflection * reflection);

      double mean = 0.0;
      for (std::size_t j = 0; j < i; ++j) mean += phi[j] * out[i - 1 - j];
      out[i] = mean + std::sqrt(std::max(variance, 0.0)) * normal(rng);
    }
    return out;
  }

  double hurst_;
  std::size_t slots_;
  FbmMethod method_ = FbmMethod::kAuto;
  std::size_t half_ = 0;
  std::vector<double> scale_;
  detail::FftwPlan plan_;
};

/// Convenience wrapper: one path of n slots from a fresh generator.
inline std::vector<double> generate_fbm(double hurst, std::size_t slots, std::uint64_t seed,
                                        FbmMethod method = FbmMethod::kAuto) {
  FbmGenerator gen(hurst, slots, method);
  Rng rng = make_rng(seed);
  return gen.sample(rng);
}

}  // namespace coinvest

#endif  // COINVEST_FBM_HPP
