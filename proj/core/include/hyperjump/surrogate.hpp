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

// Gaussian-process surrogate over (configuration, budget).
//
// The covariance is a product of a Matern 5/2 kernel on the hyper-parameter
// block of the encoding and a budget kernel built on the basis
// phi(b) = (1, exp(-rho * b)):
//
//   k(x, x') = s2 * k_M52(r(x, x')) * phi(b)^T W phi(b')
//
// so accuracy as a function of budget is modelled as a budget-independent
// level plus an exponentially decaying term. Targets are standardized before
// fitting; the prior mean is the training-set mean.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "hyperjump/space.hpp"

namespace hyperjump {

struct Observation {
  Configuration config;
  double budget = 0.0;
  double accuracy = 0.0;
  double cost = 0.0;
};

struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd length_scales;
  double budget_decay_rate = 1.0;
  Eigen::Matrix2d budget_basis_weights = Eigen::Matrix2d::Identity();
  double noise_variance = 1e-6;

  static KernelParams defaults(std::size_t encoded_width);
  /// Positivity of all scales and positive semi-definiteness of the budget block.
  bool valid() const;
  nlohmann::json to_json() const;
};

/// Matern 5/2 correlation at scaled distance r.
double matern52(double r);
/// phi(b1)^T W phi(b2).
double budget_kernel(double b1, double b2, const KernelParams& params);
/// Full covariance between two encoded points (budget coordinate last).
/// Throws std::invalid_argument on a layout mismatch.
double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& p1,
                   const Eigen::Ref<const Eigen::VectorXd>& p2, const KernelParams& params);

struct Prediction {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Anything that can report a belief about accuracy at a budget.
class AccuracyPredictor {
 public:
  virtual ~AccuracyPredictor() = default;
  virtual Prediction predict(const Configuration& config, double budget) const = 0;
};

struct SurrogateOptions {
  int restarts = 8;
  double param_lower = 1e-3;
  double param_upper = 1e3;
  double noise_floor = 1e-6;
  bool learn_noise = false;
  /// Upper bound on likelihood evaluations per restart.
  int max_evals_per_restart = 120;
  std::uint64_t seed = 0x5eed;
};

class SurrogateModel : public AccuracyPredictor {
 public:
  /// Maximizes the log marginal likelihood by multi-start coordinate search in
  /// log-parameter space. `warm_start`, when given, is used as the first start.
  /// Throws std::invalid_argument on an empty training set and
  /// std::runtime_error when the kernel matrix cannot be factorized.
  static SurrogateModel fit(std::span<const Observation> observations, const SearchSpace& space,
                            double max_budget, const SurrogateOptions& options = {},
                            const KernelParams* warm_start = nullptr);

  /// Conditions on the data with fixed kernel parameters (no optimization).
  static SurrogateModel condition(std::span<const Observation> observations,
                                  const SearchSpace& space, double max_budget,
                                  const KernelParams& params, double noise_floor = 1e-6);

  Prediction predict(const Configuration& config, double budget) const override;
  std::vector<Prediction> predict_batch(std::span<const Configuration> configs,
                                        double budget) const;

  const KernelParams& params() const { return params_; }
  double prior_mean() const { return y_mean_; }
  /// Prior standard deviation at a normalized budget.
  double prior_stddev(double budget) const;
  double log_marginal_likelihood() const { return lml_; }
  double jitter() const { return jitter_; }
  std::size_t size() const { return static_cast<std::size_t>(inputs_.rows()); }
  double max_budget() const { return max_budget_; }
  const SearchSpace& space() const { return *space_; }

 private:
  SurrogateModel() = default;
  static SurrogateModel build(std::span<const Observation> observations, const SearchSpace& space,
                              double max_budget);
  void factorize(const KernelParams& params, double noise_floor);

  std::shared_ptr<const SearchSpace> space_;
  double max_budget_ = 1.0;
  Eigen::MatrixXd inputs_;  // n x (width + 1), rows are encoded points
  Eigen::VectorXd targets_;  // standardized
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  KernelParams params_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

/// Log marginal likelihood of standardized targets under fixed parameters
/// (noise and jitter added on the diagonal). Returns -inf if K is not SPD.
double gp_log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                  const KernelParams& params, double jitter);

/// Expected improvement for maximization.
double expected_improvement(double mean, double stddev, double best_accuracy);
double expected_improvement(const AccuracyPredictor& model, const Configuration& config,
                            double budget, double best_accuracy);

}  // namespace hyperjump
