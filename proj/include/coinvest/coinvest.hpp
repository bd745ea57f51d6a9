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

#ifndef COINVEST_COINVEST_HPP
#define COINVEST_COINVEST_HPP

#include "coinvest/allocation.hpp"
#include "coinvest/commands.hpp"
#include "coinvest/economics.hpp"
#include "coinvest/fbm.hpp"
#include "coinvest/game.hpp"
#include "coinvest/lp.hpp"
#include "coinvest/montecarlo.hpp"
#include "coinvest/output.hpp"
#include "coinvest/parallel.hpp"
#include "coinvest/player_set.hpp"
#include "coinvest/random.hpp"
#include "coinvest/scenario.hpp"
#include "coinvest/slot_matrix.hpp"
#include "coinvest/traffic.hpp"

#endif  // COINVEST_COINVEST_HPP
