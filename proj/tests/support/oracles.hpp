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

// Independent reference implementations used by the unit tests and the
// acceptance suite. Nothing here calls into the library's numerical code
// beyond the search-space encoding.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hyperjump/bench.hpp"
#include "hyperjump/rng.hpp"
#include "hyperjump/surrogate.hpp"

namespace hyperjump::oracle {

/// Belief about one member: point mass when stddev == 0.
struct Member {
  double mean = 0.0;
  double stddev = 0.0;
};

/// E[(max D - max S)+] by paired sampling.
double monte_carlo_ear(std::span<const Member> discarded, std::span<const Member> selected,
                       std::size_t samples, std::uint64_t seed);

/// cdf of the max of independent members, via Monte Carlo (for atom checks).
double monte_carlo_max_cdf(std::span<const Member> members, double x, std::size_t samples,
                           std::uint64_t seed);

/// GP posterior computed with a dense LU solve and a from-scratch kernel.
struct DenseGp {
  double mean = 0.0;
  double stddev = 0.0;
};
DenseGp dense_gp_predict(std::span<const Observation> train, const SearchSpace& space,
                         double max_budget, const KernelParams& params, double jitter,
                         const Configuration& query, double budget);

/// -1/2 y'K^-1 y - 1/2 log|K| - n/2 log(2 pi), with K = kernel + (noise + jitter) I,
/// on targets standardized like the model (mean, n-1 standard deviation).
double dense_log_marginal_likelihood(std::span<const Observation> train, const SearchSpace& space,
                                     double max_budget, const KernelParams& params, double jitter);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

/// (n0, b0) per bracket of one HyperBand iteration, largest bracket first,
/// straight from n = ceil((s_max+1)/(s+1) eta^s), r = R eta^-s.
struct HbBracket {
  std::size_t n0 = 0;
  double b0 = 0.0;
};
std::vector<HbBracket> hyperband_brackets(double max_budget, int eta);

/// Last survivor of a Successive-Halving run over `configs` starting at budget
/// b0 with `stages` stages, ranking by benchmark accuracy (ties by id).
Configuration successive_halving_survivor(const Benchmark& bench,
                                          std::vector<Configuration> configs, double b0,
                                          int eta, int stages);

}  // namespace hyperjump::oracle
