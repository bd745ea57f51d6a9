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

#ifndef COINVEST_PLAYER_SET_HPP
#define COINVEST_PLAYER_SET_HPP

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coinvest {

/// Index of the infrastructure provider. Service providers occupy 1..N.
inline constexpr int kInp = 0;

/// Upper limit on |N|; coalition enumeration is 2^|N|.
inline constexpr int kMaxPlayers = 16;

/// A coalition over a fixed player universe, stored as a bitmask.
///
/// Bit 0 is the InP, bits 1..N are the service providers.
class PlayerSet {
 public:
  constexpr PlayerSet() = default;
  constexpr PlayerSet(std::uint32_t bits, int players) : bits_(bits), players_(players) {}

  static PlayerSet grand(int players) {
    check_count(players);
    return PlayerSet((std::uint32_t{1} << players) - 1u, players);
  }
  static PlayerSet none(int players) {
    check_count(players);
    return PlayerSet(0u, players);
  }

  static void check_count(int players) {
    if (players < 2 || players > kMaxPlayers) {
      throw std::invalid_argument("player count must lie in [2, " + std::to_string(kMaxPlayers) +
                                  "], got " + std::to_string(players));
    }
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr int players() const { return players_; }
  constexpr std::size_t index() const { return bits_; }

  constexpr bool contains(int player) const { return (bits_ >> player) & 1u; }
  constexpr bool has_inp() const { return contains(kInp); }
  constexpr bool empty() const { return bits_ == 0; }
  int size() const { return std::popcount(bits_); }
  int sp_count() const { return std::popcount(bits_ & ~1u); }

  constexpr PlayerSet with(int player) const {
    return PlayerSet(bits_ | (std::uint32_t{1} << player), players_);
  }
  constexpr PlayerSet without(int player) const {
    return PlayerSet(bits_ & ~(std::uint32_t{1} << player), players_);
  }
  constexpr bool subset_of(PlayerSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool is_grand() const { return bits_ == (std::uint32_t{1} << players_) - 1u; }

  std::vector<int> members() const {
    std::vector<int> out;
    for (int i = 0; i < players_; ++i) {
      if (contains(i)) out.push_back(i);
    }
    return out;
  }

  friend constexpr bool operator==(PlayerSet a, PlayerSet b) {
    return a.bits_ == b.bits_ && a.players_ == b.players_;
  }

 private:
  std::uint32_t bits_ = 0;
  int players_ = 0;
};

/// Number of coalitions (including the empty one) over `players` players.
inline std::size_t coalition_count(int players) { return std::size_t{1} << players; }

}  // namespace coinvest

#endif  // COINVEST_PLAYER_SET_HPP
