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

#include "hyperjump/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "hyperjump/normal.hpp"
#include "hyperjump/quadrature.hpp"

namespace hyperjump {
namespace {

constexpr double kTailSigmas = 8.0;
constexpr double kEarTolerance = 1e-6;
constexpr double kMinIncumbentLoss = 1e-9;

double log_cdf_product(std::span<const Prediction> gaussians, double x) {
  double log_f = 0.0;
  for (const auto& g : gaussians) log_f += norm_logcdf((x - g.mean) / g.stddev);
  return log_f;
}

}  // namespace

MaxDistribution MaxDistribution::of(std::span<const AccuracyDistribution> members) {
  if (members.empty()) throw std::invalid_argument("max of an empty member list");
  MaxDistribution out;
  for (const auto& m : members) {
    if (!std::isfinite(m.mean()) || !std::isfinite(m.stddev())) {
      throw std::domain_error("non-finite accuracy belief");
    }
    if (m.is_point()) {
      out.atom_ = out.atom_ ? std::max(*out.atom_, m.mean()) : m.mean();
    } else {
      out.gaussians_.push_back({m.mean(), m.stddev()});
    }
  }
  return out;
}

double MaxDistribution::cdf(double x) const {
  if (atom_ && x < *atom_) return 0.0;
  if (gaussians_.empty()) return 1.0;
  return std::exp(log_cdf_product(gaussians_, x));
}

double MaxDistribution::sf(double x) const {
  if (atom_ && x < *atom_) return 1.0;
  if (gaussians_.empty()) return 0.0;
  return -std::expm1(log_cdf_product(gaussians_, x));
}

double MaxDistribution::sample(Rng& rng) const {
  double best = atom_ ? *atom_ : -std::numeric_limits<double>::infinity();
  for (const auto& g : gaussians_) best = std::max(best, g.mean + g.stddev * rng.normal());
  return best;
}

namespace {

double integrate_ear(const MaxDistribution& discarded, const MaxDistribution& selected) {
  // Support of the combined members, widened by kTailSigmas on Gaussians.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const MaxDistribution* d : {&discarded, &selected}) {
    if (d->atom()) {
      lo = std::min(lo, *d->atom());
      hi = std::max(hi, *d->atom());
    }
    for (const auto& g : d->gaussians()) {
      lo = std::min(lo, g.mean - kTailSigmas * g.stddev);
      hi = std::max(hi, g.mean + kTailSigmas * g.stddev);
    }
  }
  // The integrand F_S(t) * (1 - F_D(t)) vanishes below the selected atom and,
  // when the discarded side has no Gaussians, above the discarded atom.
  if (selected.atom()) lo = std::max(lo, *selected.atom());
  for (const auto& g : selected.gaussians()) lo = std::max(lo, g.mean - kTailSigmas * g.stddev);
  double d_hi = discarded.atom() ? *discarded.atom() : -std::numeric_limits<double>::infinity();
  double d_sigma = 0.0;
  for (const auto& g : discarded.gaussians()) {
    d_hi = std::max(d_hi, g.mean + kTailSigmas * g.stddev);
    d_sigma = std::max(d_sigma, g.stddev);
  }
  hi = std::min(hi, d_hi);
  // Discarded Gaussians keep a (tiny) upper tail past a dominating selected atom.
  if (d_sigma > 0.0 && !(hi > lo)) hi = lo + kTailSigmas * d_sigma;
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::domain_error("non-finite EAR bounds");
  if (!(hi > lo)) return 0.0;

  std::vector<double> breaks;
  constexpr int kInitialPanels = 4;
  for (int i = 0; i <= kInitialPanels; ++i) breaks.push_back(lo + (hi - lo) * i / kInitialPanels);
  for (const MaxDistribution* d : {&discarded, &selected}) {
    if (d->atom() && *d->atom() > lo && *d->atom() < hi) breaks.push_back(*d->atom());
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const auto integrand = [&](double t) { return selected.cdf(t) * discarded.sf(t); };
  const QuadratureResult q = integrate_adaptive(integrand, breaks, kEarTolerance);
  if (!std::isfinite(q.value)) throw std::domain_error("non-finite EAR");
  return std::max(0.0, q.value);
}

}  // namespace

double expected_accuracy_reduction(const MaxDistribution& discarded,
                                   const MaxDistribution& selected) {
  const double ear = integrate_ear(discarded, selected);
  // P(A_D > A_S) > 0 unless both sides are atoms or the discarded atom sits at
  // or below the selected one. Keep such values strictly positive even when
  // the quadrature underflows, so that lambda = 0 never clears them.
  const bool positive =
      !discarded.gaussians().empty() ||
      (discarded.atom() && (!selected.atom() || *discarded.atom() > *selected.atom()));
  if (positive && !(ear > 0.0)) return std::numeric_limits<double>::denorm_min();
  return ear;
}

double relative_ear(double ear, double incumbent_loss) {
  if (!(incumbent_loss > 0.0)) throw std::invalid_argument("incumbent loss must be positive");
  return ear / incumbent_loss;
}

double StageMember::lcb() const { return belief.mean() - kConfidenceZ * belief.stddev(); }
double StageMember::ucb() const { return belief.mean() + kConfidenceZ * belief.stddev(); }

std::size_t selection_size(std::size_t stage_size, int eta) {
  return std::max<std::size_t>(1, stage_size / static_cast<std::size_t>(eta));
}

int floor_log(std::size_t k, int eta) {
  int m = 0;
  std::size_t p = static_cast<std::size_t>(eta);
  while (p <= k) {
    ++m;
    p *= static_cast<std::size_t>(eta);
  }
  return m;
}

CandidateIndexSets candidate_sets(std::span<const StageMember> members, int eta) {
  const std::size_t n = members.size();
  if (n < static_cast<std::size_t>(eta)) {
    throw std::invalid_argument("candidate generation needs at least eta configurations");
  }
  const std::size_t k = selection_size(n, eta);
  const int hops = floor_log(k, eta);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const auto by_score = [&](std::size_t a, std::size_t b) {
    if (members[a].score() != members[b].score()) return members[a].score() > members[b].score();
    return members[a].config.id() < members[b].config.id();
  };
  std::sort(order.begin(), order.end(), by_score);
  const std::vector<std::size_t> top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  const std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());

  std::vector<std::vector<std::size_t>> generated;
  generated.push_back(top);

  std::size_t power = 1;
  for (int i = 1; i <= hops; ++i) {
    power *= static_cast<std::size_t>(eta);
    const std::size_t r = std::min(std::max<std::size_t>(1, k / power), rest.size());
    std::vector<std::size_t> x(top.begin(), top.end() - static_cast<std::ptrdiff_t>(r));
    x.insert(x.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(r));
    generated.push_back(std::move(x));
  }

  std::vector<std::size_t> top_by_lcb = top;
  std::sort(top_by_lcb.begin(), top_by_lcb.end(), [&](std::size_t a, std::size_t b) {
    if (members[a].lcb() != members[b].lcb()) return members[a].lcb() < members[b].lcb();
    return members[a].config.id() < members[b].config.id();
  });
  std::vector<std::size_t> rest_by_ucb = rest;
  std::sort(rest_by_ucb.begin(), rest_by_ucb.end(), [&](std::size_t a, std::size_t b) {
    if (members[a].ucb() != members[b].ucb()) return members[a].ucb() > members[b].ucb();
    return members[a].config.id() < members[b].config.id();
  });
  power = 1;
  for (int i = 1; i <= hops; ++i) {
    power *= static_cast<std::size_t>(eta);
    const std::size_t r = std::min(std::max<std::size_t>(1, k / power), rest.size());
    std::vector<std::size_t> x(top_by_lcb.begin() + static_cast<std::ptrdiff_t>(r),
                               top_by_lcb.end());
    x.insert(x.end(), rest_by_ucb.begin(), rest_by_ucb.begin() + static_cast<std::ptrdiff_t>(r));
    generated.push_back(std::move(x));
  }

  CandidateIndexSets out;
  out.generated = generated.size();
  std::set<std::vector<std::size_t>> seen;
  for (auto& x : generated) {
    std::vector<std::size_t> key = x;
    std::sort(key.begin(), key.end());
    if (seen.insert(key).second) out.sets.push_back(std::move(x));
  }
  return out;
}

namespace {

std::vector<StageMember> make_members(std::span<const TestedConfig> tested,
                                      std::span<const Configuration> untested,
                                      const AccuracyPredictor& model, double budget) {
  std::vector<StageMember> members;
  members.reserve(tested.size() + untested.size());
  for (const auto& t : tested) {
    members.push_back({t.config, AccuracyDistribution::point(t.accuracy), true});
  }
  for (const auto& u : untested) {
    const Prediction p = model.predict(u, budget);
    members.push_back({u, AccuracyDistribution::gaussian(p.mean, p.stddev), false});
  }
  return members;
}

}  // namespace

CandidateSets get_candidates_for_selection(std::span<const TestedConfig> tested,
                                           std::span<const Configuration> untested,
                                           const AccuracyPredictor& model, double stage_budget,
                                           int eta) {
  const std::vector<StageMember> members = make_members(tested, untested, model, stage_budget);
  const CandidateIndexSets idx = candidate_sets(members, eta);
  CandidateSets out;
  out.generated = idx.generated;
  for (const auto& set : idx.sets) {
    std::vector<Configuration> configs;
    configs.reserve(set.size());
    for (std::size_t i : set) configs.push_back(members[i].config);
    out.sets.push_back(std::move(configs));
  }
  return out;
}

std::size_t PredictionCache::KeyHash::operator()(const Key& k) const {
  return static_cast<std::size_t>(mix64(k.id ^ mix64(std::hash<double>{}(k.budget))));
}

Prediction PredictionCache::predict(const Configuration& config, double budget) const {
  const Key key{config.id(), budget};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const Prediction p = base_.predict(config, budget);
  cache_.emplace(key, p);
  return p;
}

void PredictionCache::prefetch(std::span<const Configuration> configs, double budget) const {
  std::vector<Configuration> missing;
  for (const auto& c : configs) {
    if (!cache_.contains({c.id(), budget})) missing.push_back(c);
  }
  if (missing.empty()) return;
  if (const auto* gp = dynamic_cast<const SurrogateModel*>(&base_)) {
    const auto preds = gp->predict_batch(missing, budget);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      cache_.emplace(Key{missing[i].id(), budget}, preds[i]);
    }
  } else {
    for (const auto& c : missing) predict(c, budget);
  }
}

JumpDecision evaluate_jump_risk(const JumpRiskInput& input, const AccuracyPredictor& model) {
  if (input.plan == nullptr) throw std::invalid_argument("evaluate_jump_risk needs a bracket plan");
  const BracketPlan& plan = *input.plan;
  const int last = plan.stages();
  if (input.stage < 0 || input.stage >= last) throw std::invalid_argument("stage out of range");
  const double loss = std::max(input.incumbent_loss, kMinIncumbentLoss);

  JumpDecision decision;
  // A zero threshold accepts no hop, not even one whose risk is exactly zero.
  const auto clears = [&](double risk) {
    return input.lambda > 0.0 && decision.accumulated_rear + risk <= input.lambda;
  };
  int stage = input.stage;
  std::vector<StageMember> members =
      make_members(input.tested, input.untested, model, plan.budget(stage));

  std::vector<AccuracyDistribution> side_s;
  std::vector<AccuracyDistribution> side_d;
  std::vector<char> chosen;
  while (true) {
    if (stage == last - 1) {
      // Skipping the final stage discards all of it in favour of the incumbent.
      HopRecord hop;
      hop.from_stage = stage;
      hop.min_rear = std::numeric_limits<double>::infinity();
      side_d.clear();
      for (const auto& m : members) {
        side_d.push_back(m.belief);
        hop.discarded_uncertain = hop.discarded_uncertain || !m.belief.is_point();
      }
      if (input.incumbent_accuracy && !side_d.empty()) {
        const AccuracyDistribution atom = AccuracyDistribution::point(*input.incumbent_accuracy);
        const double ear = expected_accuracy_reduction(MaxDistribution::of(side_d),
                                                       MaxDistribution::of(std::span<const AccuracyDistribution>(&atom, 1)));
        hop.min_rear = relative_ear(ear, loss);
        ++decision.rear_evaluations;
      } else if (side_d.empty()) {
        hop.min_rear = 0.0;
      }
      decision.hops.push_back(hop);
      if (!clears(hop.min_rear)) {
        decision.target_stage = stage;
        decision.blocking_rear = hop.min_rear;
        for (const auto& m : members) decision.selected.push_back(m.config);
        return decision;
      }
      decision.accumulated_rear += hop.min_rear;
      decision.target_stage = last;
      return decision;
    }
    if (members.size() < static_cast<std::size_t>(plan.eta)) {
      decision.target_stage = stage;
      for (const auto& m : members) decision.selected.push_back(m.config);
      return decision;
    }
    const CandidateIndexSets candidates = candidate_sets(members, plan.eta);
    double min_rear = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    bool argmin_uncertain = false;
    for (std::size_t c = 0; c < candidates.sets.size(); ++c) {
      chosen.assign(members.size(), 0);
      for (std::size_t i : candidates.sets[c]) chosen[i] = 1;
      side_s.clear();
      side_d.clear();
      bool uncertain = false;
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (chosen[i]) {
          side_s.push_back(members[i].belief);
        } else {
          side_d.push_back(members[i].belief);
          uncertain = uncertain || !members[i].belief.is_point();
        }
      }
      double rear_value = 0.0;
      if (!side_d.empty()) {
        const double ear =
            expected_accuracy_reduction(MaxDistribution::of(side_d), MaxDistribution::of(side_s));
        rear_value = relative_ear(ear, loss);
      }
      ++decision.rear_evaluations;
      if (rear_value < min_rear) {
        min_rear = rear_value;
        argmin = c;
        argmin_uncertain = uncertain;
      }
    }

    HopRecord hop;
    hop.from_stage = stage;
    hop.min_rear = min_rear;
    hop.discarded_uncertain = argmin_uncertain;
    for (std::size_t i : candidates.sets[argmin]) hop.selected.push_back(members[i].config.id());
    decision.hops.push_back(hop);

    if (!clears(min_rear)) {
      decision.target_stage = stage;
      decision.blocking_rear = min_rear;
      for (std::size_t i : candidates.sets[argmin]) decision.selected.push_back(members[i].config);
      return decision;
    }
    decision.accumulated_rear += min_rear;
    ++stage;
    std::vector<Configuration> next;
    for (std::size_t i : candidates.sets[argmin]) next.push_back(members[i].config);
    members = make_members({}, next, model, plan.budget(stage));
  }
}

}  // namespace hyperjump
