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

#include "hyperjump/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "hyperjump/normal.hpp"

namespace hyperjump {
namespace {

constexpr double kLog2Pi = 1.83787706640934548356;
constexpr double kSqrt5 = 2.23606797749978969641;
constexpr double kMaxCorrelationLogit = 3.0;

struct Encoded {
  Eigen::MatrixXd hp;      // n x width, hyper-parameter block
  Eigen::VectorXd budget;  // n, normalized budget
};

Encoded split(const Eigen::MatrixXd& inputs) {
  const Eigen::Index width = inputs.cols() - 1;
  return {inputs.leftCols(width), inputs.col(width)};
}

// Covariance between two point sets, without noise.
Eigen::MatrixXd cross_covariance(const Encoded& a, const Encoded& b, const KernelParams& p) {
  const Eigen::ArrayXd inv_ls = p.length_scales.array().inverse();
  const Eigen::MatrixXd sa = a.hp.array().rowwise() * inv_ls.transpose();
  const Eigen::MatrixXd sb = b.hp.array().rowwise() * inv_ls.transpose();
  const Eigen::VectorXd na = sa.rowwise().squaredNorm();
  const Eigen::VectorXd nb = sb.rowwise().squaredNorm();
  Eigen::MatrixXd r2 = (-2.0 * sa * sb.transpose()).colwise() + na;
  r2.rowwise() += nb.transpose();

  const Eigen::ArrayXd ea = (-p.budget_decay_rate * a.budget.array()).exp();
  const Eigen::ArrayXd eb = (-p.budget_decay_rate * b.budget.array()).exp();
  const Eigen::Matrix2d& w = p.budget_basis_weights;

  Eigen::MatrixXd k(a.hp.rows(), b.hp.rows());
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      const double r = std::sqrt(std::max(0.0, r2(i, j)));
      const double kb = w(0, 0) + w(0, 1) * ea[i] + w(1, 0) * eb[j] + w(1, 1) * ea[i] * eb[j];
      k(i, j) = p.signal_variance * matern52(r) * kb;
    }
  }
  return k;
}

// Optimization works on a flat vector of transformed parameters.
struct ParamCodec {
  std::size_t width = 0;
  bool learn_noise = false;
  double noise_floor = 1e-6;
  double log_lo = std::log(1e-3);
  double log_hi = std::log(1e3);

  std::size_t size() const { return width + 4 + (learn_noise ? 1 : 0); }

  double lower(std::size_t i) const {
    if (i == width + 3) return -kMaxCorrelationLogit;
    if (learn_noise && i == width + 4) return std::log(noise_floor);
    return log_lo;
  }
  double upper(std::size_t i) const {
    if (i == width + 3) return kMaxCorrelationLogit;
    return log_hi;
  }

  KernelParams decode(const Eigen::VectorXd& theta) const {
    KernelParams p;
    p.signal_variance = std::exp(theta[0]);
    p.length_scales = theta.segment(1, static_cast<Eigen::Index>(width)).array().exp();
    p.budget_decay_rate = std::exp(theta[width + 1]);
    const double w22 = std::exp(theta[width + 2]);
    const double off = std::tanh(theta[width + 3]) * std::sqrt(w22);
    p.budget_basis_weights << 1.0, off, off, w22;
    p.noise_variance = learn_noise ? std::exp(theta[width + 4]) : noise_floor;
    return p;
  }

  Eigen::VectorXd encode(const KernelParams& p) const {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(size()));
    // Fold the budget block back to the unit-w11 parametrization.
    const Eigen::Matrix2d& w = p.budget_basis_weights;
    const double w11 = std::max(w(0, 0), 1e-12);
    const double scale = p.signal_variance * w11;
    theta[0] = std::log(scale);
    for (std::size_t d = 0; d < width; ++d) {
      theta[1 + d] = std::log(p.length_scales[static_cast<Eigen::Index>(d)]);
    }
    theta[width + 1] = std::log(p.budget_decay_rate);
    const double w22 = std::max(w(1, 1) / w11, 1e-12);
    theta[width + 2] = std::log(w22);
    const double corr = std::clamp(w(0, 1) / (w11 * std::sqrt(w22)), -0.999, 0.999);
    theta[width + 3] = std::atanh(corr);
    if (learn_noise) theta[width + 4] = std::log(std::max(p.noise_variance, noise_floor));
    for (std::size_t i = 0; i < size(); ++i) {
      theta[static_cast<Eigen::Index>(i)] =
          std::clamp(theta[static_cast<Eigen::Index>(i)], lower(i), upper(i));
    }
    return theta;
  }
};

double lml_from_factor(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& y,
                       Eigen::VectorXd* alpha_out) {
  Eigen::VectorXd alpha = llt.solve(y);
  const Eigen::MatrixXd& l = llt.matrixLLT();
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det_half += std::log(l(i, i));
  const double n = static_cast<double>(y.size());
  const double value = -0.5 * y.dot(alpha) - log_det_half - 0.5 * n * kLog2Pi;
  if (alpha_out) *alpha_out = std::move(alpha);
  return value;
}

// Factors k + (noise + jitter) I with the smallest diagonal jitter, growing by
// 10x from 1e-10 * signal variance, that makes it positive definite. Returns
// the jitter used, or nothing if 1e-2 * signal variance still fails.
std::optional<double> factor_with_jitter(const Eigen::MatrixXd& k_in, const KernelParams& p,
                                         Eigen::LLT<Eigen::MatrixXd>& llt) {
  Eigen::MatrixXd k = k_in;
  k.diagonal().array() += p.noise_variance;
  for (double rel = 1e-10; rel <= 1e-2 * (1.0 + 1e-9); rel *= 10.0) {
    const double jitter = rel * p.signal_variance;
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    llt.compute(kj);
    if (llt.info() == Eigen::Success) return jitter;
  }
  return std::nullopt;
}

}  // namespace

KernelParams KernelParams::defaults(std::size_t encoded_width) {
  KernelParams p;
  p.signal_variance = 1.0;
  p.length_scales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(encoded_width), 0.5);
  p.budget_decay_rate = 3.0;
  p.budget_basis_weights << 1.0, -0.5, -0.5, 1.0;
  p.noise_variance = 1e-6;
  return p;
}

bool KernelParams::valid() const {
  if (!(signal_variance > 0.0) || !(budget_decay_rate > 0.0) || !(noise_variance >= 0.0)) {
    return false;
  }
  if ((length_scales.array() <= 0.0).any() || !length_scales.allFinite()) return false;
  const Eigen::Matrix2d& w = budget_basis_weights;
  if (!w.allFinite() || std::abs(w(0, 1) - w(1, 0)) > 1e-12 * (1.0 + std::abs(w(0, 1)))) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(w, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, w.norm());
}

nlohmann::json KernelParams::to_json() const {
  nlohmann::json j;
  j["signal_variance"] = signal_variance;
  j["length_scales"] = std::vector<double>(length_scales.data(),
                                           length_scales.data() + length_scales.size());
  j["budget_decay_rate"] = budget_decay_rate;
  j["budget_basis_weights"] = {budget_basis_weights(0, 0), budget_basis_weights(0, 1),
                               budget_basis_weights(1, 1)};
  j["noise_variance"] = noise_variance;
  return j;
}

double matern52(double r) {
  const double s = kSqrt5 * r;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

double budget_kernel(double b1, double b2, const KernelParams& params) {
  const double e1 = std::exp(-params.budget_decay_rate * b1);
  const double e2 = std::exp(-params.budget_decay_rate * b2);
  const Eigen::Matrix2d& w = params.budget_basis_weights;
  return w(0, 0) + w(0, 1) * e2 + w(1, 0) * e1 + w(1, 1) * e1 * e2;
}

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& p1,
                   const Eigen::Ref<const Eigen::VectorXd>& p2, const KernelParams& params) {
  const Eigen::Index width = params.length_scales.size();
  if (p1.size() != p2.size() || p1.size() != width + 1) {
    throw std::invalid_argument("kernel_eval: encoded layouts differ");
  }
  const double r =
      ((p1.head(width) - p2.head(width)).array() / params.length_scales.array()).matrix().norm();
  return params.signal_variance * matern52(r) * budget_kernel(p1[width], p2[width], params);
}

double gp_log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                  const KernelParams& params, double jitter) {
  const Encoded enc = split(inputs);
  Eigen::MatrixXd k = cross_covariance(enc, enc, params);
  k.diagonal().array() += params.noise_variance + jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return lml_from_factor(llt, targets, nullptr);
}

SurrogateModel SurrogateModel::build(std::span<const Observation> observations,
                                     const SearchSpace& space, double max_budget) {
  if (observations.empty()) throw std::invalid_argument("empty training set");
  // Later duplicates of (configuration, budget) replace earlier ones.
  struct Key {
    std::vector<double> values;
    double budget;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return ConfigurationHash{}(k.values) ^ std::hash<double>{}(k.budget);
    }
  };
  std::unordered_map<Key, std::size_t, KeyHash> slot;
  std::vector<const Observation*> kept;
  kept.reserve(observations.size());
  for (const auto& obs : observations) {
    if (!std::isfinite(obs.accuracy)) throw std::invalid_argument("observation accuracy is not finite");
    Key key{std::vector<double>(obs.config.values().begin(), obs.config.values().end()), obs.budget};
    auto [it, inserted] = slot.emplace(std::move(key), kept.size());
    if (inserted) {
      kept.push_back(&obs);
    } else {
      kept[it->second] = &obs;
    }
  }

  SurrogateModel m;
  m.space_ = std::make_shared<const SearchSpace>(space);
  m.max_budget_ = max_budget;
  const auto n = static_cast<Eigen::Index>(kept.size());
  const auto width = static_cast<Eigen::Index>(space.encoded_width());
  m.inputs_.resize(n, width + 1);
  Eigen::VectorXd y(n);
  Eigen::VectorXd row(width + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    space.encode_into(kept[static_cast<std::size_t>(i)]->config.values(),
                      kept[static_cast<std::size_t>(i)]->budget, max_budget, row);
    m.inputs_.row(i) = row.transpose();
    y[i] = kept[static_cast<std::size_t>(i)]->accuracy;
  }
  m.y_mean_ = y.mean();
  double var = 0.0;
  if (n > 1) var = (y.array() - m.y_mean_).square().sum() / static_cast<double>(n - 1);
  m.y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
  m.targets_ = (y.array() - m.y_mean_) / m.y_scale_;
  return m;
}

void SurrogateModel::factorize(const KernelParams& params, double noise_floor) {
  params_ = params;
  params_.noise_variance = std::max(params_.noise_variance, noise_floor);
  const Encoded enc = split(inputs_);
  const Eigen::MatrixXd k = cross_covariance(enc, enc, params_);
  const auto jitter = factor_with_jitter(k, params_, llt_);
  if (!jitter) throw std::runtime_error("kernel matrix factorization failed after jitter escalation");
  jitter_ = *jitter;
  lml_ = lml_from_factor(llt_, targets_, &alpha_);
}

SurrogateModel SurrogateModel::condition(std::span<const Observation> observations,
                                         const SearchSpace& space, double max_budget,
                                         const KernelParams& params, double noise_floor) {
  SurrogateModel m = build(observations, space, max_budget);
  if (static_cast<std::size_t>(params.length_scales.size()) != space.encoded_width()) {
    throw std::invalid_argument("kernel parameters do not match the search space");
  }
  m.factorize(params, noise_floor);
  return m;
}

SurrogateModel SurrogateModel::fit(std::span<const Observation> observations,
                                   const SearchSpace& space, double max_budget,
                                   const SurrogateOptions& options, const KernelParams* warm_start) {
  SurrogateModel m = build(observations, space, max_budget);

  ParamCodec codec;
  codec.width = space.encoded_width();
  codec.learn_noise = options.learn_noise;
  codec.noise_floor = options.noise_floor;
  codec.log_lo = std::log(options.param_lower);
  codec.log_hi = std::log(options.param_upper);
  const std::size_t dim = codec.size();

  const Encoded enc = split(m.inputs_);
  auto objective = [&](const Eigen::VectorXd& theta) {
    const KernelParams p = codec.decode(theta);
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (!factor_with_jitter(cross_covariance(enc, enc, p), p, llt)) {
      return -std::numeric_limits<double>::infinity();
    }
    return lml_from_factor(llt, m.targets_, nullptr);
  };

  std::vector<Eigen::VectorXd> starts;
  const bool warm_ok = warm_start && static_cast<std::size_t>(warm_start->length_scales.size()) ==
                                         space.encoded_width();
  starts.push_back(codec.encode(warm_ok ? *warm_start : KernelParams::defaults(codec.width)));
  Rng rng(options.seed ^ mix64(static_cast<std::uint64_t>(m.inputs_.rows())));
  const double start_lo = std::max(codec.log_lo, std::log(0.05));
  const double start_hi = std::min(codec.log_hi, std::log(20.0));
  for (int r = 1; r < options.restarts; ++r) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (i == codec.width + 3) {
        theta[ii] = rng.uniform(-2.0, 2.0);
      } else if (codec.learn_noise && i == codec.width + 4) {
        theta[ii] = rng.uniform(std::log(options.noise_floor), std::log(1e-1));
      } else {
        theta[ii] = rng.uniform(start_lo, start_hi);
      }
    }
    starts.push_back(std::move(theta));
  }

  Eigen::VectorXd best_theta = starts.front();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    Eigen::VectorXd theta = start;
    double f = objective(theta);
    int evals = 1;
    double step = 1.0;
    while (step >= 1.0 / 32.0 && evals < options.max_evals_per_restart) {
      bool improved = false;
      for (std::size_t i = 0; i < dim && evals < options.max_evals_per_restart; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd cand = theta;
          cand[ii] = std::clamp(theta[ii] + sign * step, codec.lower(i), codec.upper(i));
          if (cand[ii] == theta[ii]) continue;
          const double fc = objective(cand);
          ++evals;
          if (fc > f + 1e-10) {
            theta = std::move(cand);
            f = fc;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (f > best) {
      best = f;
      best_theta = theta;
    }
  }
  m.factorize(codec.decode(best_theta), options.noise_floor);
  return m;
}

double SurrogateModel::prior_stddev(double budget) const {
  const double b = std::min(1.0, budget / max_budget_);
  return y_scale_ * std::sqrt(params_.signal_variance * budget_kernel(b, b, params_));
}

std::vector<Prediction> SurrogateModel::predict_batch(std::span<const Configuration> configs,
                                                      double budget) const {
  const auto m = static_cast<Eigen::Index>(configs.size());
  const auto width = static_cast<Eigen::Index>(space_->encoded_width());
  Eigen::MatrixXd queries(m, width + 1);
  Eigen::VectorXd row(width + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    space_->encode_into(configs[static_cast<std::size_t>(i)].values(), budget, max_budget_, row);
    queries.row(i) = row.transpose();
  }
  const Encoded train = split(inputs_);
  const Encoded query = split(queries);
  const Eigen::MatrixXd kq = cross_covariance(train, query, params_);  // n x m
  const Eigen::VectorXd mean = kq.transpose() * alpha_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(kq);
  const double b = query.budget.size() ? query.budget[0] : 1.0;
  const double prior_var = params_.signal_variance * budget_kernel(b, b, params_);

  std::vector<Prediction> out(configs.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const double var = std::max(0.0, prior_var - v.col(i).squaredNorm());
    out[static_cast<std::size_t>(i)] = {y_mean_ + y_scale_ * mean[i], y_scale_ * std::sqrt(var)};
  }
  return out;
}

Prediction SurrogateModel::predict(const Configuration& config, double budget) const {
  return predict_batch(std::span<const Configuration>(&config, 1), budget).front();
}

double expected_improvement(double mean, double stddev, double best_accuracy) {
  if (!(stddev > 0.0)) return std::max(mean - best_accuracy, 0.0);
  const double z = (mean - best_accuracy) / stddev;
  return std::max(0.0, stddev * (z * norm_cdf(z) + norm_pdf(z)));
}

double expected_improvement(const AccuracyPredictor& model, const Configuration& config,
                            double budget, double best_accuracy) {
  const Prediction p = model.predict(config, budget);
  return expected_improvement(p.mean, p.stddev, best_accuracy);
}

}  // namespace hyperjump
