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

#include "hyperjump/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hyperjump {
namespace {

constexpr double kFailurePenalty = 1e-6;

bool same_values(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

nlohmann::json ids_of(std::span<const Configuration> configs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : configs) out.push_back(c.id());
  return out;
}

}  // namespace

std::vector<BracketPlan> plan_brackets(double max_budget, int eta) {
  const int s_max = max_stage_index(max_budget, eta);
  std::vector<BracketPlan> out;
  for (int stages = s_max + 1; stages >= 1; --stages) {
    std::size_t power = 1;
    for (int i = 1; i < stages; ++i) power *= static_cast<std::size_t>(eta);
    const std::size_t num = static_cast<std::size_t>(s_max + 1) * power;
    const std::size_t den = static_cast<std::size_t>(stages);
    out.push_back(make_bracket(max_budget, eta, stages, (num + den - 1) / den));
  }
  return out;
}

void OptimizerPolicy::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw std::invalid_argument("lambda must be a finite value >= 0");
  }
  if (!(p_nj >= 0.0 && p_nj <= 1.0)) throw std::invalid_argument("p_nj must lie in [0, 1]");
  if (!(p_u >= 0.0 && p_u <= 1.0)) throw std::invalid_argument("p_u must lie in [0, 1]");
}

std::vector<Configuration> promote_top_k(std::span<const TestedConfig> tested, std::size_t k) {
  std::vector<const TestedConfig*> order;
  order.reserve(tested.size());
  for (const auto& t : tested) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const TestedConfig* a, const TestedConfig* b) {
    if (a->accuracy != b->accuracy) return a->accuracy > b->accuracy;
    return a->config.id() < b->config.id();
  });
  std::vector<Configuration> out;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out.push_back(order[i]->config);
  return out;
}

std::vector<Configuration> sample_distinct(const SearchSpace& space, std::size_t n, Rng& rng,
                                           ConfigIdSequence& ids,
                                           std::span<const Configuration> exclude) {
  std::unordered_map<std::size_t, std::vector<std::vector<double>>> seen;
  const auto contains = [&](std::span<const double> v) {
    auto it = seen.find(ConfigurationHash{}(v));
    if (it == seen.end()) return false;
    for (const auto& s : it->second) {
      if (same_values(s, v)) return true;
    }
    return false;
  };
  const auto remember = [&](std::span<const double> v) {
    seen[ConfigurationHash{}(v)].emplace_back(v.begin(), v.end());
  };
  for (const auto& c : exclude) remember(c.values());

  std::vector<Configuration> out;
  out.reserve(n);
  const std::size_t patience = 64 * n + 1000;
  std::size_t attempts = 0;
  while (out.size() < n) {
    Configuration draw = sample_uniform(space, rng);
    ++attempts;
    if (contains(draw.values()) && attempts < patience) continue;
    remember(draw.values());
    out.emplace_back(ids.next(), std::vector<double>(draw.values().begin(), draw.values().end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ModelState

ModelState::ModelState(const SearchSpace& space, double max_budget, SurrogateOptions options)
    : ModelState(space, max_budget, options, Schedule{}) {}

ModelState::ModelState(const SearchSpace& space, double max_budget, SurrogateOptions options,
                       Schedule schedule)
    : space_(space), max_budget_(max_budget), options_(options), schedule_(schedule) {}

void ModelState::add(const Configuration& config, double budget, double accuracy) {
  if (!std::isfinite(accuracy)) throw std::invalid_argument("observation accuracy is not finite");
  auto& slots = index_[ConfigurationHash{}(config.values()) ^ std::hash<double>{}(budget)];
  ++version_;
  for (std::size_t i : slots) {
    Observation& o = observations_[i];
    if (o.budget == budget && same_values(o.config.values(), config.values())) {
      o.config = config;
      o.accuracy = accuracy;
      return;
    }
  }
  slots.push_back(observations_.size());
  observations_.push_back({config, budget, accuracy, 0.0});
}

const SurrogateModel& ModelState::model() {
  if (!usable()) throw std::logic_error("surrogate queried before enough observations");
  if (model_ && fitted_version_ == version_) return *model_;
  const std::size_t n = size();
  bool reoptimize = !params_ || static_cast<double>(n) >=
                                    schedule_.refit_growth * static_cast<double>(last_hyper_size_);
  if (!reoptimize) {
    try {
      model_ = SurrogateModel::condition(observations_, space_, max_budget_, *params_,
                                         options_.noise_floor);
    } catch (const std::runtime_error&) {
      reoptimize = true;
    }
  }
  if (reoptimize) {
    const std::size_t m = std::min(n, std::max<std::size_t>(schedule_.hyper_subset, 1));
    const KernelParams* warm = params_ ? &*params_ : nullptr;
    if (m == n) {
      model_ = SurrogateModel::fit(observations_, space_, max_budget_, options_, warm);
    } else {
      std::vector<Observation> subset;
      subset.reserve(m);
      for (std::size_t i = 0; i < m; ++i) subset.push_back(observations_[i * n / m]);
      const SurrogateModel sub = SurrogateModel::fit(subset, space_, max_budget_, options_, warm);
      model_ = SurrogateModel::condition(observations_, space_, max_budget_, sub.params(),
                                         options_.noise_floor);
    }
    params_ = model_->params();
    last_hyper_size_ = n;
    ++hyper_fits_;
  }
  fitted_version_ = version_;
  return *model_;
}

// ---------------------------------------------------------------------------
// Warm start and ordering

std::vector<Configuration> warm_start_bracket(std::size_t n, ModelState* model,
                                              const SearchSpace& space,
                                              const OptimizerPolicy& policy, double max_budget,
                                              double best_accuracy, Rng& rng,
                                              ConfigIdSequence& ids, std::size_t pool_size) {
  if (n == 0) throw std::invalid_argument("warm start needs n >= 1");
  if (model == nullptr || policy.no_bw || !model->usable() || !std::isfinite(best_accuracy)) {
    return sample_distinct(space, n, rng, ids);
  }
  const auto n_random = std::min(
      n, static_cast<std::size_t>(std::ceil(policy.p_u * static_cast<double>(n) - 1e-12)));
  std::vector<Configuration> out = sample_distinct(space, n_random, rng, ids);
  if (out.size() == n) return out;

  std::vector<Configuration> pool;
  {
    std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
    const auto known = [&](std::span<const double> v, std::size_t h) {
      auto it = seen.find(h);
      if (it == seen.end()) return false;
      for (std::size_t i : it->second) {
        if (same_values(pool[i].values(), v)) return true;
      }
      return false;
    };
    for (std::size_t i = 0; i < pool_size; ++i) {
      Configuration c = sample_uniform(space, rng);
      const std::size_t h = ConfigurationHash{}(c.values());
      if (known(c.values(), h)) continue;
      if (std::any_of(out.begin(), out.end(), [&](const Configuration& o) { return o == c; })) {
        continue;
      }
      seen[h].push_back(pool.size());
      pool.push_back(std::move(c));
    }
  }
  const std::vector<Prediction> preds = model->model().predict_batch(pool, max_budget);
  std::vector<double> ei(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ei[i] = expected_improvement(preds[i].mean, preds[i].stddev, best_accuracy);
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ei[a] > ei[b]; });
  for (std::size_t i = 0; i < order.size() && out.size() < n; ++i) {
    const auto v = pool[order[i]].values();
    out.emplace_back(ids.next(), std::vector<double>(v.begin(), v.end()));
  }
  if (out.size() < n) {
    auto extra = sample_distinct(space, n - out.size(), rng, ids, out);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

OrderingChoice next_conf_to_test(const OrderingInput& input, const AccuracyPredictor& model) {
  if (input.pending.empty()) throw std::invalid_argument("no pending configuration");
  if (input.plan == nullptr) throw std::invalid_argument("ordering needs a bracket plan");
  OrderingChoice best;
  if (input.pending.size() == 1) return best;

  const double budget = input.plan->budget(input.stage);
  std::vector<TestedConfig> tested(input.tested.begin(), input.tested.end());
  tested.push_back({});
  std::vector<Configuration> untested;
  bool have = false;
  for (std::size_t i = 0; i < input.pending.size(); ++i) {
    const Configuration& u = input.pending[i];
    tested.back() = {u, model.predict(u, budget).mean};
    untested.clear();
    for (std::size_t j = 0; j < input.pending.size(); ++j) {
      if (j != i) untested.push_back(input.pending[j]);
    }
    untested.insert(untested.end(), input.running.begin(), input.running.end());
    JumpRiskInput risk;
    risk.stage = input.stage;
    risk.tested = tested;
    risk.untested = untested;
    risk.plan = input.plan;
    risk.lambda = input.lambda;
    risk.incumbent_loss = input.incumbent_loss;
    risk.incumbent_accuracy = input.incumbent_accuracy;
    const JumpDecision d = evaluate_jump_risk(risk, model);
    const double total = d.accumulated_rear + d.blocking_rear.value_or(0.0);
    const bool better =
        !have || d.target_stage > best.simulated_target ||
        (d.target_stage == best.simulated_target &&
         (total < best.simulated_risk ||
          (total == best.simulated_risk && u.id() < input.pending[best.index].id())));
    if (better) {
      best = {i, d.target_stage, total};
      have = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// BracketScheduler

std::vector<Configuration> BracketState::untested() const {
  std::vector<Configuration> out = pending;
  for (const auto& [id, c] : running) out.push_back(c);
  return out;
}

BracketScheduler::BracketScheduler(const Benchmark& benchmark, Options options)
    : sample_rng_(mix64(options.seed) ^ 0x73616d706c65ULL),
      order_rng_(mix64(options.seed) ^ 0x6f72646572ULL),
      policy_rng_(mix64(options.seed) ^ 0x706f6c696379ULL),
      benchmark_(benchmark),
      options_(options),
      best_seen_(-std::numeric_limits<double>::infinity()),
      worst_seen_(std::numeric_limits<double>::infinity()) {
  if (std::abs(options_.max_budget - benchmark.max_budget()) > 1e-9 * benchmark.max_budget()) {
    throw std::invalid_argument("optimizer max budget differs from the benchmark's");
  }
  cycle_ = plan_brackets(options_.max_budget, options_.eta);
  if (options_.largest_bracket_only) cycle_.resize(1);
  if (const auto declared = benchmark.declared_rungs()) {
    for (double b : budget_rungs(options_.max_budget, options_.eta)) {
      const bool found = std::any_of(declared->begin(), declared->end(), [&](double r) {
        return std::abs(r - b) <= 1e-9 * std::max(1.0, b);
      });
      if (!found) {
        throw std::invalid_argument("benchmark does not declare budget rung " + std::to_string(b));
      }
    }
  }
}

std::vector<Configuration> BracketScheduler::sample_bracket(const BracketPlan& plan) {
  return sample_distinct(benchmark_.space(), plan.size(0), sample_rng_, ids_);
}

std::size_t BracketScheduler::pick_next(BracketState& bracket) {
  return order_rng_.index(bracket.pending.size());
}

BracketState* BracketScheduler::find(int bracket_id) {
  for (auto& b : active_) {
    if (b->id == bracket_id) return b.get();
  }
  return nullptr;
}

void BracketScheduler::activate() {
  const BracketPlan& plan = cycle_[next_plan_];
  next_plan_ = (next_plan_ + 1) % cycle_.size();
  auto bracket = std::make_unique<BracketState>();
  bracket->id = next_bracket_id_++;
  bracket->plan = plan;
  bracket->members = sample_bracket(plan);
  bracket->pending = bracket->members;
  bracket->jumps_enabled = enable_jumps(*bracket);
  nlohmann::json record = {{"bracket", bracket->id},
                           {"stage", 0},
                           {"stages", plan.stages()},
                           {"configs", bracket->members.size()},
                           {"budget", plan.initial_budget()},
                           {"jumps_enabled", bracket->jumps_enabled}};
  const nlohmann::json extra = bracket_details();
  for (const auto& [key, value] : extra.items()) record[key] = value;
  emit("bracket_start", std::move(record));
  active_.push_back(std::move(bracket));
  settle(*active_.back());
}

std::optional<EvalRequest> BracketScheduler::propose() {
  constexpr int kMaxActivations = 10000;
  for (int guard = 0; guard < kMaxActivations; ++guard) {
    for (auto& b : active_) {
      if (b->pending.empty()) continue;
      const std::size_t idx = pick_next(*b);
      EvalRequest req;
      req.id = next_request_++;
      req.bracket = b->id;
      req.stage = b->stage;
      req.config = b->pending[idx];
      req.budget = b->stage_budget();
      b->pending.erase(b->pending.begin() + static_cast<std::ptrdiff_t>(idx));
      b->running.emplace(req.id, req.config);
      prepare(req);
      return req;
    }
    // Idle capacity: a new bracket may start, except while the first runs.
    if (!active_.empty() && !first_bracket_done_) return std::nullopt;
    activate();
    std::erase_if(active_, [](const auto& b) { return b->finished; });
  }
  throw std::logic_error("brackets keep ending without evaluations");
}

std::vector<RequestId> BracketScheduler::ingest(const EvalRequest& request,
                                                const EvaluationResult& result) {
  const double r = options_.max_budget;
  if (request.budget == r) {
    const double loss = benchmark_.loss(result.accuracy);
    const Incumbent next =
        update_incumbent(incumbent_, request.config, request.budget, result.accuracy, loss, r);
    if (next.loss != incumbent_.loss || next.accuracy != incumbent_.accuracy) {
      incumbent_ = next;
      emit("incumbent", {{"bracket", request.bracket},
                         {"stage", request.stage},
                         {"config", request.config.id()},
                         {"budget", request.budget},
                         {"accuracy", incumbent_.accuracy},
                         {"loss", incumbent_.loss}});
    }
  }
  best_seen_ = std::max(best_seen_, result.accuracy);
  worst_seen_ = std::min(worst_seen_, result.accuracy);
  observe(request, result);
  return record(request, result.accuracy);
}

std::vector<RequestId> BracketScheduler::ingest_failure(const EvalRequest& request,
                                                        const std::string&) {
  const double base = std::isfinite(worst_seen_) ? worst_seen_ : 0.0;
  return record(request, base - kFailurePenalty);
}

std::vector<RequestId> BracketScheduler::record(const EvalRequest& request, double accuracy) {
  BracketState* b = find(request.bracket);
  if (b == nullptr || !b->running.contains(request.id)) {
    throw std::logic_error("ingested request " + std::to_string(request.id) + " is not in flight");
  }
  b->running.erase(request.id);
  b->tested.push_back({request.config, accuracy});

  std::vector<RequestId> cancelled;
  for (auto& bracket : active_) {
    if (bracket->finished) continue;
    auto ids = settle(*bracket);
    cancelled.insert(cancelled.end(), ids.begin(), ids.end());
  }
  std::erase_if(active_, [](const auto& x) { return x->finished; });
  return cancelled;
}

std::vector<RequestId> BracketScheduler::settle(BracketState& b) {
  std::vector<RequestId> cancelled;
  const int last = b.plan.stages();
  while (!b.finished) {
    if (b.stage >= last) {
      b.finished = true;
      break;
    }
    if (b.pending.empty() && b.running.empty()) {
      const std::size_t k = selection_size(b.members.size(), options_.eta);
      std::vector<Configuration> next = promote_top_k(b.tested, k);
      ++b.stage;
      b.tested.clear();
      b.members = next;
      b.pending = std::move(next);
      if (b.stage >= last) {
        b.pending.clear();
        b.members.clear();
      }
      continue;
    }
    if (!b.jumps_enabled) break;
    const std::optional<JumpDecision> decision = jump_check(b);
    if (!decision || decision->target_stage == b.stage) break;

    std::vector<RequestId> interrupted;
    for (const auto& [id, c] : b.running) interrupted.push_back(id);
    nlohmann::json hops = nlohmann::json::array();
    for (const auto& h : decision->hops) {
      hops.push_back({{"from_stage", h.from_stage},
                      {"min_rear", h.min_rear},
                      {"selected", h.selected},
                      {"discarded_uncertain", h.discarded_uncertain}});
    }
    nlohmann::json record = {{"bracket", b.id},
                             {"stage", b.stage},
                             {"target_stage", decision->target_stage},
                             {"rear", decision->accumulated_rear},
                             {"hops", std::move(hops)},
                             {"selected", ids_of(decision->selected)},
                             {"cancelled", interrupted}};
    if (decision->blocking_rear) record["blocking_rear"] = *decision->blocking_rear;
    const nlohmann::json details = jump_details();
    for (auto& [key, value] : details.items()) record[key] = value;
    emit("jump", std::move(record));
    ++jumps_;

    cancelled.insert(cancelled.end(), interrupted.begin(), interrupted.end());
    b.running.clear();
    b.tested.clear();
    b.stage = decision->target_stage;
    b.members = decision->selected;
    b.pending = decision->selected;
    if (b.stage >= last) {
      b.members.clear();
      b.pending.clear();
    }
  }
  if (b.finished) {
    emit("bracket_end", {{"bracket", b.id}, {"stage", b.stage}});
    if (b.id == 0) first_bracket_done_ = true;
  }
  return cancelled;
}

Incumbent update_incumbent(const Incumbent& incumbent, const Configuration& config, double budget,
                           double accuracy, double loss, double max_budget) {
  if (budget != max_budget || !(accuracy > incumbent.accuracy)) return incumbent;
  Incumbent next;
  next.config = config;
  next.accuracy = accuracy;
  next.loss = std::max(loss, kMinIncumbentLoss);
  return next;
}

// ---------------------------------------------------------------------------
// HyperJump

HyperJump::HyperJump(const Benchmark& benchmark, HyperJumpOptions options)
    : BracketScheduler(benchmark, {options.max_budget, options.eta, options.seed, false}),
      hj_(options),
      model_(benchmark.space(), options.max_budget,
             [&] {
               SurrogateOptions s = options.surrogate;
               s.seed = mix64(s.seed ^ options.seed);
               return s;
             }(),
             options.schedule),
      rungs_(budget_rungs(options.max_budget, options.eta)) {
  hj_.policy.validate();
}

std::vector<Configuration> HyperJump::sample_bracket(const BracketPlan& plan) {
  const double best =
      incumbent().config ? incumbent().accuracy : best_accuracy_seen();
  return warm_start_bracket(plan.size(0), &model_, benchmark().space(), hj_.policy,
                            hj_.max_budget, best, sample_rng_, ids_, hj_.warm_start_pool);
}

bool HyperJump::enable_jumps(const BracketState&) {
  if (hj_.policy.no_jump) return false;
  return !policy_rng_.bernoulli(hj_.policy.p_nj);
}

const PredictionCache& HyperJump::cache() {
  const SurrogateModel& m = model_.model();
  if (!cache_ || cache_version_ != model_.version()) {
    cache_ = std::make_unique<PredictionCache>(m);
    cache_version_ = model_.version();
  }
  return *cache_;
}

std::size_t HyperJump::pick_next(BracketState& bracket) {
  if (hj_.policy.no_ord || !bracket.jumps_enabled || !model_.usable()) {
    return BracketScheduler::pick_next(bracket);
  }
  if (bracket.pending.size() == 1) return 0;
  const PredictionCache& c = cache();
  c.prefetch(bracket.pending, bracket.stage_budget());
  std::vector<Configuration> running;
  for (const auto& [id, conf] : bracket.running) running.push_back(conf);
  OrderingInput in;
  in.stage = bracket.stage;
  in.tested = bracket.tested;
  in.pending = bracket.pending;
  in.running = running;
  in.plan = &bracket.plan;
  in.lambda = hj_.policy.lambda;
  in.incumbent_loss = incumbent().loss;
  if (incumbent().config) in.incumbent_accuracy = incumbent().accuracy;
  return next_conf_to_test(in, c).index;
}

std::optional<JumpDecision> HyperJump::jump_check(const BracketState& bracket) {
  if (!model_.usable()) return std::nullopt;
  const std::vector<Configuration> untested = bracket.untested();
  if (untested.empty()) return std::nullopt;
  const PredictionCache& c = cache();
  c.prefetch(untested, bracket.stage_budget());
  JumpRiskInput in;
  in.stage = bracket.stage;
  in.tested = bracket.tested;
  in.untested = untested;
  in.plan = &bracket.plan;
  in.lambda = hj_.policy.lambda;
  in.incumbent_loss = incumbent().loss;
  if (incumbent().config) in.incumbent_accuracy = incumbent().accuracy;
  JumpDecision d = evaluate_jump_risk(in, c);
  if (d.target_stage == bracket.stage) return std::nullopt;
  last_jump_details_ = {{"lambda", hj_.policy.lambda},
                        {"incumbent_loss", in.incumbent_loss},
                        {"model_size", model_.size()}};
  if (model_.params()) last_jump_details_["kernel"] = model_.params()->to_json();
  return d;
}

nlohmann::json HyperJump::bracket_details() const {
  nlohmann::json out = {{"model_size", model_.size()}};
  if (model_.params()) out["kernel"] = model_.params()->to_json();
  return out;
}

void HyperJump::observe(const EvalRequest& request, const EvaluationResult& result) {
  model_.add(request.config, request.budget, result.accuracy);
  if (hj_.policy.no_opt) return;
  auto& budgets = trained_[std::vector<double>(request.config.values().begin(),
                                               request.config.values().end())];
  budgets.insert(request.budget);
  for (const auto& s : result.snapshots) {
    model_.add(request.config, s.budget, s.accuracy);
    budgets.insert(s.budget);
  }
}

void HyperJump::prepare(EvalRequest& request) {
  if (hj_.policy.no_opt) return;
  request.snapshot_rungs = rungs_;
  auto it = trained_.find(
      std::vector<double>(request.config.values().begin(), request.config.values().end()));
  if (it == trained_.end()) return;
  auto below = it->second.lower_bound(request.budget);
  if (below != it->second.begin()) request.resume_from = *std::prev(below);
}

}  // namespace hyperjump
