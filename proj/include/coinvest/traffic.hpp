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

#ifndef COINVEST_TRAFFIC_HPP
#define COINVEST_TRAFFIC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "coinvest/fbm.hpp"
#include "coinvest/random.hpp"
#include "coinvest/slot_matrix.hpp"

namespace coinvest {

struct SinusoidComponent {
  double amplitude = 0.0;  ///< requests/second
  double phase = 0.0;      ///< slots

  friend bool operator==(const SinusoidComponent&, const SinusoidComponent&) = default;
};

/// Periodic request rate a0 + sum_k a_k sin(2 k pi (t - t_k) / T), in requests/second.
///
/// Component k (1-based) is the k-th harmonic of the period. The rate must be
/// nonnegative at every slot of one period.
class RateProfile {
 public:
  RateProfile() = default;
  explicit RateProfile(double base_rate, std::vector<SinusoidComponent> components = {},
                       std::size_t period = 24)
      : base_rate_(base_rate), components_(std::move(components)), period_(period) {
    if (!std::isfinite(base_rate)) throw std::invalid_argument("base_rate must be finite");
    if (period_ < 1) throw std::invalid_argument("period must be at least one slot");
    double scale = std::abs(base_rate_);
    for (const auto& c : components_) {
      if (!std::isfinite(c.amplitude) || !std::isfinite(c.phase)) {
        throw std::invalid_argument("sinusoid amplitude and phase must be finite");
      }
      scale += std::abs(c.amplitude);
    }
    for (std::size_t t = 0; t < period_; ++t) {
      const double r = raw(static_cast<double>(t));
      if (r < -1e-12 * scale) {
        throw std::invalid_argument("expected rate is negative (" + std::to_string(r) + ") at slot " +
                                    std::to_string(t));
      }
    }
  }

  double base_rate() const { return base_rate_; }
  const std::vector<SinusoidComponent>& components() const { return components_; }
  std::size_t period() const { return period_; }

  double raw(double t) const {
    double r = base_rate_;
    const double w = 2.0 * std::numbers::pi / static_cast<double>(period_);
    for (std::size_t k = 0; k < components_.size(); ++k) {
      const auto& c = components_[k];
      r += c.amplitude * std::sin(static_cast<double>(k + 1) * w * (t - c.phase));
    }
    return r;
  }

  friend bool operator==(const RateProfile&, const RateProfile&) = default;

 private:
  double base_rate_ = 0.0;
  std::vector<SinusoidComponent> components_;
  std::size_t period_ = 24;
};

/// Expected request rate at slot t. Round-off below zero is clamped.
inline double expected_rate(const RateProfile& profile, std::size_t t) {
  return std::max(0.0, profile.raw(static_cast<double>(t)));
}

/// Independent per-slot loads, uniform on [(1-sigma) l, (1+sigma) l].
class BoundedLoadModel {
 public:
  BoundedLoadModel(RateProfile profile, double sigma, double slot_seconds)
      : profile_(std::move(profile)), sigma_(sigma), slot_seconds_(slot_seconds) {
    if (!(sigma >= 0.0 && sigma <= 1.0)) {
      throw std::invalid_argument("sigma must lie in [0, 1], got " + std::to_string(sigma));
    }
    if (!(slot_seconds > 0.0)) throw std::invalid_argument("slot length must be positive");
  }

  const RateProfile& profile() const { return profile_; }
  double sigma() const { return sigma_; }
  double slot_seconds() const { return slot_seconds_; }

  double expected_load(std::size_t t) const { return expected_rate(profile_, t) * slot_seconds_; }
  double min_load(std::size_t t) const { return (1.0 - sigma_) * expected_load(t); }
  double max_load(std::size_t t) const { return (1.0 + sigma_) * expected_load(t); }

 private:
  RateProfile profile_;
  double sigma_;
  double slot_seconds_;
};

/// Rate d(t) [(1 - alpha) E max(0, f(t)) + alpha max(0, f(t))] with f a
/// standard fBm on the slot grid, so E max(0, f(t)) = t^H / sqrt(2 pi).
class FbmLoadModel {
 public:
  FbmLoadModel(RateProfile trend, double alpha, double hurst, double slot_seconds)
      : trend_(std::move(trend)), alpha_(alpha), hurst_(hurst), slot_seconds_(slot_seconds) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw std::invalid_argument("alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
    if (!(hurst > 0.0 && hurst < 1.0)) {
      throw std::invalid_argument("hurst must lie in (0, 1), got " + std::to_string(hurst));
    }
    if (!(slot_seconds > 0.0)) throw std::invalid_argument("slot length must be positive");
  }

  const RateProfile& trend() const { return trend_; }
  double alpha() const { return alpha_; }
  double hurst() const { return hurst_; }
  double slot_seconds() const { return slot_seconds_; }

  /// E max(0, f(t)) for standard fBm.
  double positive_part_mean(std::size_t t) const {
    return std::pow(static_cast<double>(t), hurst_) / std::sqrt(2.0 * std::numbers::pi);
  }

  double expected_load(std::size_t t) const {
    return expected_rate(trend_, t) * positive_part_mean(t) * slot_seconds_;
  }

  /// Load at slot t given the path value f(t).
  double load(std::size_t t, double path_value) const {
    const double s = std::max(0.0, path_value);
    return expected_rate(trend_, t) * ((1.0 - alpha_) * positive_part_mean(t) + alpha_ * s) *
           slot_seconds_;
  }

 private:
  RateProfile trend_;
  double alpha_;
  double hurst_;
  double slot_seconds_;
};

using LoadModel = std::variant<BoundedLoadModel, FbmLoadModel>;

inline double expected_load(const BoundedLoadModel& m, std::size_t t) { return m.expected_load(t); }
inline double expected_load(const FbmLoadModel& m, std::size_t t) { return m.expected_load(t); }
inline double expected_load(const LoadModel& m, std::size_t t) {
  return std::visit([t](const auto& model) { return model.expected_load(t); }, m);
}

/// Expected loads; row 0 (InP) is zero, row i is models[i-1].
template <typename Model>
LoadMatrix expected_loads(std::span<const Model> models, std::size_t horizon) {
  LoadMatrix out(models.size() + 1, horizon);
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t t = 0; t < horizon; ++t) out(i + 1, t) = expected_load(models[i], t);
  }
  return out;
}

inline void fill_bounded_row(const BoundedLoadModel& model, std::span<double> row, Rng& rng) {
  for (std::size_t t = 0; t < row.size(); ++t) {
    const double lo = model.min_load(t);
    const double hi = model.max_load(t);
    row[t] = std::clamp(lo + (hi - lo) * uniform01(rng), lo, hi);
  }
}

/// Loads drawn independently across slots and players. Player i (1-based)
/// uses the sub-stream derive_seed(seed, i).
inline LoadMatrix sample_bounded_loads(std::span<const BoundedLoadModel> models, std::size_t horizon,
                                       std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least one slot");
  LoadMatrix out(models.size() + 1, horizon);
  for (std::size_t i = 0; i < models.size(); ++i) {
    Rng rng = make_rng(derive_seed(seed, i + 1));
    fill_bounded_row(models[i], out.row(i + 1), rng);
  }
  return out;
}

inline void fill_fbm_row(const FbmLoadModel& model, const FbmGenerator& gen, std::span<double> row,
                         Rng& rng) {
  const std::vector<double> path = gen.sample(rng);
  for (std::size_t t = 0; t < row.size(); ++t) row[t] = model.load(t, path[t]);
}

/// One independent fBm path per service provider; seeding as in
/// sample_bounded_loads.
inline LoadMatrix sample_fbm_loads(std::span<const FbmLoadModel> models, std::size_t horizon,
                                   std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least one slot");
  LoadMatrix out(models.size() + 1, horizon);
  std::map<double, std::unique_ptr<FbmGenerator>> generators;
  for (std::size_t i = 0; i < models.size(); ++i) {
    auto& gen = generators[models[i].hurst()];
    if (!gen) gen = std::make_unique<FbmGenerator>(models[i].hurst(), horizon);
    Rng rng = make_rng(derive_seed(seed, i + 1));
    fill_fbm_row(models[i], *gen, out.row(i + 1), rng);
  }
  return out;
}

/// Reusable sampler over a mixed list of per-SP models. Holds one fBm
/// generator per distinct Hurst value so repeated draws skip the spectrum
/// setup. sample() is const and thread-safe.
class LoadSampler {
 public:
  LoadSampler(std::vector<LoadModel> models, std::size_t horizon)
      : models_(std::move(models)), horizon_(horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least one slot");
    std::map<double, std::shared_ptr<const FbmGenerator>> by_hurst;
    generators_.resize(models_.size());
    for (std::size_t i = 0; i < models_.size(); ++i) {
      if (const auto* fbm = std::get_if<FbmLoadModel>(&models_[i])) {
        auto& gen = by_hurst[fbm->hurst()];
        if (!gen) gen = std::make_shared<const FbmGenerator>(fbm->hurst(), horizon_);
        generators_[i] = gen;
      }
    }
  }

  const std::vector<LoadModel>& models() const { return models_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t players() const { return models_.size() + 1; }

  LoadMatrix expected() const { return expected_loads(std::span<const LoadModel>(models_), horizon_); }

  LoadMatrix sample(std::uint64_t seed) const {
    LoadMatrix out(players(), horizon_);
    for (std::size_t i = 0; i < models_.size(); ++i) {
      Rng rng = make_rng(derive_seed(seed, i + 1));
      if (const auto* b = std::get_if<BoundedLoadModel>(&models_[i])) {
        fill_bounded_row(*b, out.row(i + 1), rng);
      } else {
        fill_fbm_row(std::get<FbmLoadModel>(models_[i]), *generators_[i], out.row(i + 1), rng);
      }
    }
    return out;
  }

 private:
  std::vector<LoadModel> models_;
  std::size_t horizon_;
  std::vector<std::shared_ptr<const FbmGenerator>> generators_;
};

}  // namespace coinvest

#endif  // COINVEST_TRAFFIC_HPP
