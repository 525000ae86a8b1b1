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

// Risk of jumping over the rest of a stage.
//
// Selecting a subset S of a stage's configurations C and discarding D = C \ S
// risks throwing away the stage's best configuration. With A_D and A_S the
// maxima of the (independent) accuracy beliefs of both sets, the expected
// accuracy reduction is
//
//   EAR(D, S) = E[max(A_D - A_S, 0)] = integral of F_S(t) * (1 - F_D(t)) dt,
//
// which needs only the CDFs of the two maxima. Dividing by the incumbent's
// loss gives the relative risk rEAR that is compared against lambda.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hyperjump/bracket.hpp"
#include "hyperjump/space.hpp"
#include "hyperjump/surrogate.hpp"

namespace hyperjump {

/// Point mass for measured configurations, Gaussian for predicted ones.
class AccuracyDistribution {
 public:
  /// Standard deviations below this collapse to a point mass.
  static constexpr double kMinStddev = 1e-9;

  static AccuracyDistribution point(double value) { return AccuracyDistribution(value, 0.0); }
  static AccuracyDistribution gaussian(double mean, double stddev) {
    return AccuracyDistribution(mean, stddev < kMinStddev ? 0.0 : stddev);
  }

  bool is_point() const { return stddev_ == 0.0; }
  double mean() const { return mean_; }
  double stddev() const { return stddev_; }

 private:
  AccuracyDistribution(double mean, double stddev) : mean_(mean), stddev_(stddev) {}
  double mean_;
  double stddev_;
};

/// Distribution of the maximum of independent members:
/// F(x) = [x >= atom] * prod_i Phi((x - mean_i) / stddev_i).
class MaxDistribution {
 public:
  /// Throws std::invalid_argument on an empty member list.
  static MaxDistribution of(std::span<const AccuracyDistribution> members);

  const std::optional<double>& atom() const { return atom_; }
  std::span<const Prediction> gaussians() const { return gaussians_; }

  double cdf(double x) const;
  /// 1 - F(x), computed without cancellation in the upper tail.
  double sf(double x) const;

  /// Sample of the maximum (Monte-Carlo oracles).
  double sample(Rng& rng) const;

 private:
  std::optional<double> atom_;
  std::vector<Prediction> gaussians_;
};

/// Expected accuracy reduction E[(A_D - A_S)+] by adaptive quadrature
/// (absolute tolerance 1e-6). Throws std::domain_error on non-finite values.
double expected_accuracy_reduction(const MaxDistribution& discarded,
                                   const MaxDistribution& selected);

/// EAR normalized by the incumbent loss. Throws std::invalid_argument when
/// incumbent_loss <= 0.
double relative_ear(double ear, double incumbent_loss);

struct RiskEstimate {
  double ear = 0.0;
  double rear = 0.0;
  double incumbent_loss = 1.0;
};

struct TestedConfig {
  Configuration config;
  double accuracy = 0.0;
};

/// A stage member with its belief at the stage budget and the rankings keys
/// used by candidate generation.
struct StageMember {
  Configuration config;
  AccuracyDistribution belief = AccuracyDistribution::point(0.0);
  bool tested = false;

  double score() const { return belief.mean(); }
  double lcb() const;
  double ucb() const;
};

/// One-sided 90% normal quantile used for the confidence bounds.
inline constexpr double kConfidenceZ = 1.2815515655446004;

/// max(1, floor(n / eta)).
std::size_t selection_size(std::size_t stage_size, int eta);
/// floor(log_eta(k)) in exact integer arithmetic.
int floor_log(std::size_t k, int eta);

struct CandidateIndexSets {
  std::vector<std::vector<std::size_t>> sets;  // member indices, deduplicated
  std::size_t generated = 0;                   // count before deduplication
};

/// Candidate selections over `members` (indices into the span): the top-k by
/// score, then floor(log_eta k) accuracy-based and floor(log_eta k)
/// confidence-bound based replacements. Requires members.size() >= eta.
CandidateIndexSets candidate_sets(std::span<const StageMember> members, int eta);

struct CandidateSets {
  std::vector<std::vector<Configuration>> sets;
  std::size_t generated = 0;
};

/// Candidate selections for a stage. Throws std::invalid_argument when the
/// stage has fewer than eta configurations.
CandidateSets get_candidates_for_selection(std::span<const TestedConfig> tested,
                                           std::span<const Configuration> untested,
                                           const AccuracyPredictor& model, double stage_budget,
                                           int eta);

struct HopRecord {
  int from_stage = 0;
  double min_rear = 0.0;
  std::vector<ConfigId> selected;
  bool discarded_uncertain = false;  // some discarded member had a Gaussian belief
};

struct JumpDecision {
  int target_stage = 0;
  std::vector<Configuration> selected;
  /// Sum of the cleared hops' minimum rEARs.
  double accumulated_rear = 0.0;
  /// Minimum rEAR of the hop that exceeded lambda, absent if none did.
  std::optional<double> blocking_rear;
  std::vector<HopRecord> hops;  // cleared hops, then the blocking hop if any
  int rear_evaluations = 0;
};

/// Memoizes predictions per (configuration id, budget).
class PredictionCache : public AccuracyPredictor {
 public:
  explicit PredictionCache(const AccuracyPredictor& base) : base_(base) {}
  Prediction predict(const Configuration& config, double budget) const override;
  /// Fills the cache for a batch (uses the batched GP solve when available).
  void prefetch(std::span<const Configuration> configs, double budget) const;

 private:
  struct Key {
    ConfigId id;
    double budget;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  const AccuracyPredictor& base_;
  mutable std::unordered_map<Key, Prediction, KeyHash> cache_;
};

struct JumpRiskInput {
  int stage = 0;
  std::span<const TestedConfig> tested;
  std::span<const Configuration> untested;
  const BracketPlan* plan = nullptr;
  double lambda = 0.10;
  double incumbent_loss = 1.0;
  /// Accuracy of the full-budget incumbent; without one the final stage is
  /// never skipped.
  std::optional<double> incumbent_accuracy;
};

/// Multi-hop jump evaluation. Starting at `stage`, repeatedly picks the
/// minimum-risk candidate selection for the hop to the next stage and extends
/// the jump while the accumulated rEAR stays within lambda (lambda = 0 clears
/// no hop). A hop between inner stages is only attempted from a stage holding
/// at least eta configurations. The hop out of the final stage discards every member and
/// is measured against the incumbent accuracy as a point mass; clearing it
/// returns (plan.stages(), {}), which abandons the bracket.
JumpDecision evaluate_jump_risk(const JumpRiskInput& input, const AccuracyPredictor& model);

}  // namespace hyperjump
