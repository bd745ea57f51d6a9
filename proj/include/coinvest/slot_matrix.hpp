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

#ifndef COINVEST_SLOT_MATRIX_HPP
#define COINVEST_SLOT_MATRIX_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace coinvest {

/// Dense player-by-slot table of doubles, row-major.
class SlotMatrix {
 public:
  SlotMatrix() = default;
  SlotMatrix(std::size_t rows, std::size_t slots, double fill = 0.0)
      : rows_(rows), slots_(slots), data_(rows * slots, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t slots() const { return slots_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t row, std::size_t slot) { return data_[row * slots_ + slot]; }
  double operator()(std::size_t row, std::size_t slot) const { return data_[row * slots_ + slot]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * slots_, slots_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * slots_, slots_}; }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const SlotMatrix&, const SlotMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t slots_ = 0;
  std::vector<double> data_;
};

/// Per-player, per-slot request counts. Row 0 is the InP and stays zero.
using LoadMatrix = SlotMatrix;

}  // namespace coinvest

#endif  // COINVEST_SLOT_MATRIX_HPP
