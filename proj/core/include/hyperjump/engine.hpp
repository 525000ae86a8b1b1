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
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "hyperjump/bench.hpp"
#include "hyperjump/bracket.hpp"
#include "hyperjump/optimizer.hpp"
#include "hyperjump/risk.hpp"
#include "hyperjump/rng.hpp"
#include "hyperjump/space.hpp"
#include "hyperjump/surrogate.hpp"

namespace hyperjump {

/// One HyperBand iteration: brackets with S_max + 1, S_max, ..., 1 stages.
/// The bracket with S stages starts ceil((S_max + 1) / S * eta^(S-1))
/// configurations at budget R * eta^-(S-1). Throws std::invalid_argument when
/// eta < 2 or R < eta.
std::vector<BracketPlan> plan_brackets(double max_budget, int eta);

struct OptimizerPolicy {
  double lambda = 0.10;
  double p_nj = 0.3;
  double p_u = 0.3;
  bool no_jump = false;
  bool no_ord = false;
  bool no_opt = false;  // no pause-resume and no opportunistic snapshots
  bool no_bw = false;   // no model-based bracket warm start

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Top-k of `tested` by measured accuracy, ties broken by ascending id.
std::vector<Configuration> promote_top_k(std::span<const TestedConfig> tested, std::size_t k);

/// n uniform configurations with distinct values (as far as the space allows),
/// excluding values in `exclude`. Ids are taken from `ids`.
std::vector<Configuration> sample_distinct(const SearchSpace& space, std::size_t n, Rng& rng,
                                           ConfigIdSequence& ids,
                                           std::span<const Configuration> exclude = {});

/// Training set plus a lazily refitted surrogate. Kernel hyper-parameters are
/// re-optimized when the training set has grown by `refit_growth` since the
/// last optimization; in between the model is re-conditioned on all data with
/// the previous parameters.
class ModelState {
 public:
  struct Schedule {
    double refit_growth = 1.5;
    /// Hyper-parameters are learned on at most this many (evenly strided)
    /// observations; the posterior always conditions on all of them.
    std::size_t hyper_subset = 150;
  };

  ModelState(const SearchSpace& space, double max_budget, SurrogateOptions options);
  ModelState(const SearchSpace& space, double max_budget, SurrogateOptions options,
             Schedule schedule);

  /// Adds or replaces the observation for (values, budget).
  void add(const Configuration& config, double budget, double accuracy);

  std::size_t size() const { return observations_.size(); }
  /// Observations needed before the model is used: encoded width + 1.
  std::size_t min_observations() const { return space_.encoded_width() + 1; }
  bool usable() const { return size() >= min_observations(); }

  /// Current posterior; refits if data changed. Requires usable().
  const SurrogateModel& model();
  std::uint64_t version() const { return version_; }
  std::size_t hyper_fits() const { return hyper_fits_; }
  /// Kernel parameters of the last hyper-parameter fit, if any.
  const std::optional<KernelParams>& params() const { return params_; }
  std::span<const Observation> observations() const { return observations_; }

 private:
  SearchSpace space_;
  double max_budget_;
  SurrogateOptions options_;
  Schedule schedule_;
  std::vector<Observation> observations_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> index_;
  std::uint64_t version_ = 0;
  std::uint64_t fitted_version_ = 0;
  std::size_t last_hyper_size_ = 0;
  std::size_t hyper_fits_ = 0;
  std::optional<SurrogateModel> model_;
  std::optional<KernelParams> params_;
};

/// Configurations for a new bracket. With a cold model (or no_bw) all n are
/// uniform; otherwise ceil(p_u * n) are uniform and the rest are the top-EI
/// candidates at the maximum budget from `pool_size` uniform candidates.
std::vector<Configuration> warm_start_bracket(std::size_t n, ModelState* model,
                                              const SearchSpace& space,
                                              const OptimizerPolicy& policy, double max_budget,
                                              double best_accuracy, Rng& rng,
                                              ConfigIdSequence& ids, std::size_t pool_size = 1000);

struct OrderingInput {
  int stage = 0;
  std::span<const TestedConfig> tested;
  std::span<const Configuration> pending;  // candidates for the next evaluation
  std::span<const Configuration> running;  // untested but already in flight
  const BracketPlan* plan = nullptr;
  double lambda = 0.10;
  double incumbent_loss = 1.0;
  std::optional<double> incumbent_accuracy;
};

struct OrderingChoice {
  std::size_t index = 0;  // into pending
  int simulated_target = 0;
  double simulated_risk = 0.0;
};

/// Picks the pending configuration whose measurement (simulated at the
/// posterior mean) enables the longest jump; ties go to the lowest simulated
/// risk (accumulated plus blocking rEAR), then to the lowest id.
OrderingChoice next_conf_to_test(const OrderingInput& input, const AccuracyPredictor& model);

/// Mutable state of one running bracket.
struct BracketState {
  int id = 0;
  BracketPlan plan;
  int stage = 0;
  std::vector<Configuration> members;  // C
  std::vector<TestedConfig> tested;    // T
  std::vector<Configuration> pending;  // U, not yet started
  std::map<RequestId, Configuration> running;  // U, in flight
  bool jumps_enabled = false;
  bool finished = false;

  std::vector<Configuration> untested() const;
  double stage_budget() const { return plan.budget(stage); }
};

/// Stage-synchronous bracket machinery shared by HyperBand, Successive Halving
/// and HyperJump: bracket cycling, SH promotion, in-flight tracking, parallel
/// bracket activation (never while the first bracket runs) and jump
/// application with cancellation of the jumped-from stage.
class BracketScheduler : public Optimizer {
 public:
  struct Options {
    double max_budget = 81.0;
    int eta = 3;
    std::uint64_t seed = 0;
    /// Only cycle the largest bracket (Successive Halving).
    bool largest_bracket_only = false;
  };

  BracketScheduler(const Benchmark& benchmark, Options options);

  std::optional<EvalRequest> propose() override;
  std::vector<RequestId> ingest(const EvalRequest& request, const EvaluationResult& result) override;
  std::vector<RequestId> ingest_failure(const EvalRequest& request,
                                        const std::string& reason) override;
  const Incumbent& incumbent() const override { return incumbent_; }

  int brackets_started() const { return next_bracket_id_; }
  std::size_t jumps() const { return jumps_; }
  int active_brackets() const { return static_cast<int>(active_.size()); }
  std::span<const BracketPlan> cycle() const { return cycle_; }

 protected:
  virtual std::vector<Configuration> sample_bracket(const BracketPlan& plan);
  virtual bool enable_jumps(const BracketState&) { return false; }
  /// Index into bracket.pending of the next configuration to start.
  virtual std::size_t pick_next(BracketState& bracket);
  virtual std::optional<JumpDecision> jump_check(const BracketState&) { return std::nullopt; }
  virtual void observe(const EvalRequest&, const EvaluationResult&) {}
  virtual void prepare(EvalRequest&) {}
  /// Extra fields for the log record of a jump just returned by jump_check.
  virtual nlohmann::json jump_details() const { return nlohmann::json::object(); }
  /// Extra fields merged into the bracket_start record.
  virtual nlohmann::json bracket_details() const { return nlohmann::json::object(); }

  const Benchmark& benchmark() const { return benchmark_; }
  const Options& options() const { return options_; }
  /// Best accuracy measured at any budget (-inf before the first result).
  double best_accuracy_seen() const { return best_seen_; }

  Rng sample_rng_;
  Rng order_rng_;
  Rng policy_rng_;
  ConfigIdSequence ids_;

 private:
  std::vector<RequestId> record(const EvalRequest& request, double accuracy);
  std::vector<RequestId> settle(BracketState& bracket);
  BracketState* find(int bracket_id);
  void activate();

  const Benchmark& benchmark_;
  Options options_;
  std::vector<BracketPlan> cycle_;
  std::size_t next_plan_ = 0;
  int next_bracket_id_ = 0;
  bool first_bracket_done_ = false;
  std::vector<std::unique_ptr<BracketState>> active_;
  RequestId next_request_ = 1;
  Incumbent incumbent_;
  double best_seen_;
  double worst_seen_;
  std::size_t jumps_ = 0;
};

struct HyperJumpOptions {
  double max_budget = 81.0;
  int eta = 3;
  OptimizerPolicy policy;
  std::uint64_t seed = 0;
  SurrogateOptions surrogate;
  ModelState::Schedule schedule;
  std::size_t warm_start_pool = 1000;
};

/// HyperBand with risk-bounded stage jumps, model-driven evaluation order,
/// model-based bracket warm start, pause-resume and opportunistic snapshots.
class HyperJump final : public BracketScheduler {
 public:
  HyperJump(const Benchmark& benchmark, HyperJumpOptions options);

  std::string name() const override { return "hyperjump"; }
  const OptimizerPolicy& policy() const { return hj_.policy; }
  const ModelState& model_state() const { return model_; }

 protected:
  std::vector<Configuration> sample_bracket(const BracketPlan& plan) override;
  bool enable_jumps(const BracketState& bracket) override;
  std::size_t pick_next(BracketState& bracket) override;
  std::optional<JumpDecision> jump_check(const BracketState& bracket) override;
  void observe(const EvalRequest& request, const EvaluationResult& result) override;
  void prepare(EvalRequest& request) override;
  nlohmann::json jump_details() const override { return last_jump_details_; }
  nlohmann::json bracket_details() const override;

 private:
  const PredictionCache& cache();

  HyperJumpOptions hj_;
  ModelState model_;
  std::vector<double> rungs_;
  std::map<std::vector<double>, std::set<double>> trained_;  // budgets trained per values
  std::unique_ptr<PredictionCache> cache_;
  std::uint64_t cache_version_ = 0;
  nlohmann::json last_jump_details_ = nlohmann::json::object();
};

}  // namespace hyperjump
