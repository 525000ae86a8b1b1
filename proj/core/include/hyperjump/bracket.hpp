// Copyright 2026 The HyperJump Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <cstddef>
#include <vector>

namespace hyperjump {

struct StagePlan {
  std::size_t configs = 0;
  double budget = 0.0;
};

/// Successive-halving ladder of one bracket: stage i holds configs_i
/// configurations at budget b * eta^i, the last stage runs at max_budget.
struct BracketPlan {
  double max_budget = 0.0;
  int eta = 3;
  int s_max = 0;
  std::vector<StagePlan> ladder;

  int stages() const { return static_cast<int>(ladder.size()); }
  double initial_budget() const { return ladder.front().budget; }
  double budget(int stage) const { return ladder.at(static_cast<std::size_t>(stage)).budget; }
  std::size_t size(int stage) const { return ladder.at(static_cast<std::size_t>(stage)).configs; }
};

/// floor(log_eta(max_budget)), robust to floating-point round-off.
int max_stage_index(double max_budget, int eta);

/// Bracket with `stages` stages starting from `initial_configs` configurations
/// at budget max_budget * eta^-(stages-1).
BracketPlan make_bracket(double max_budget, int eta, int stages, std::size_t initial_configs);

/// Every budget that any bracket of (max_budget, eta) can use, ascending.
std::vector<double> budget_rungs(double max_budget, int eta);

}  // namespace hyperjump
