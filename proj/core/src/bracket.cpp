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

#include "hyperjump/bracket.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hyperjump {

int max_stage_index(double max_budget, int eta) {
  if (eta < 2) throw std::invalid_argument("eta must be >= 2");
  if (!(max_budget >= eta)) throw std::invalid_argument("max budget must be >= eta");
  int s = 0;
  double power = eta;
  while (power <= max_budget * (1.0 + 1e-9)) {
    ++s;
    power *= eta;
  }
  return s;
}

BracketPlan make_bracket(double max_budget, int eta, int stages, std::size_t initial_configs) {
  BracketPlan plan;
  plan.max_budget = max_budget;
  plan.eta = eta;
  plan.s_max = max_stage_index(max_budget, eta);
  if (stages < 1 || stages > plan.s_max + 1) throw std::invalid_argument("invalid stage count");
  if (initial_configs < 1) throw std::invalid_argument("bracket needs at least one configuration");
  std::size_t n = initial_configs;
  for (int i = 0; i < stages; ++i) {
    const double budget = max_budget * std::pow(static_cast<double>(eta), i - (stages - 1));
    plan.ladder.push_back({n, i == stages - 1 ? max_budget : budget});
    n = std::max<std::size_t>(1, n / static_cast<std::size_t>(eta));
  }
  return plan;
}

std::vector<double> budget_rungs(double max_budget, int eta) {
  const int s_max = max_stage_index(max_budget, eta);
  std::vector<double> rungs;
  for (int i = s_max; i >= 1; --i) rungs.push_back(max_budget * std::pow(static_cast<double>(eta), -i));
  rungs.push_back(max_budget);
  return rungs;
}

}  // namespace hyperjump
