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

#include "hyperjump/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace hyperjump {
namespace {

void track_incumbent(Incumbent& incumbent, const Benchmark& benchmark, const EvalRequest& request,
                     double accuracy,
                     const std::function<void(nlohmann::json)>& emit) {
  const Incumbent next =
      update_incumbent(incumbent, request.config, request.budget, accuracy,
                       benchmark.loss(accuracy), benchmark.max_budget());
  if (next.accuracy == incumbent.accuracy) return;
  incumbent = next;
  emit({{"config", request.config.id()},
        {"budget", request.budget},
        {"accuracy", incumbent.accuracy},
        {"loss", incumbent.loss}});
}

}  // namespace

RandomSearch::RandomSearch(const Benchmark& benchmark, std::uint64_t seed)
    : benchmark_(benchmark), rng_(mix64(seed) ^ 0x73616d706c65ULL) {}

std::optional<EvalRequest> RandomSearch::propose() {
  EvalRequest req;
  req.id = next_request_++;
  req.config = sample_uniform(benchmark_.space(), rng_, ids_.next());
  req.budget = benchmark_.max_budget();
  return req;
}

std::vector<RequestId> RandomSearch::ingest(const EvalRequest& request,
                                            const EvaluationResult& result) {
  track_incumbent(incumbent_, benchmark_, request, result.accuracy,
                  [&](nlohmann::json f) { emit("incumbent", std::move(f)); });
  return {};
}

std::vector<RequestId> RandomSearch::ingest_failure(const EvalRequest&, const std::string&) {
  return {};
}

BoEi::BoEi(const Benchmark& benchmark, BoEiOptions options)
    : benchmark_(benchmark),
      options_(options),
      rng_(mix64(options.seed) ^ 0x73616d706c65ULL),
      model_(benchmark.space(), benchmark.max_budget(),
             [&] {
               SurrogateOptions s = options.surrogate;
               s.seed = mix64(s.seed ^ options.seed);
               return s;
             }(),
             options.schedule) {}

std::optional<EvalRequest> BoEi::propose() {
  if (in_flight_) return std::nullopt;
  const double r = benchmark_.max_budget();
  EvalRequest req;
  req.id = next_request_++;
  req.budget = r;
  if (proposed_ < model_.min_observations() || !model_.usable()) {
    req.config = sample_uniform(benchmark_.space(), rng_, ids_.next());
  } else {
    std::vector<Configuration> pool;
    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < options_.pool_size; ++i) {
      Configuration c = sample_uniform(benchmark_.space(), rng_);
      std::vector<double> v(c.values().begin(), c.values().end());
      if (evaluated_.contains(v) || !seen.insert(v).second) continue;
      pool.push_back(std::move(c));
    }
    if (pool.empty()) {
      req.config = sample_uniform(benchmark_.space(), rng_, ids_.next());
    } else {
      const double best = incumbent_.config ? incumbent_.accuracy
                                            : -std::numeric_limits<double>::infinity();
      const auto preds = model_.model().predict_batch(pool, r);
      std::size_t arg = 0;
      double top = -1.0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const double ei = std::isfinite(best)
                              ? expected_improvement(preds[i].mean, preds[i].stddev, best)
                              : preds[i].mean;
        if (ei > top) {
          top = ei;
          arg = i;
        }
      }
      const auto v = pool[arg].values();
      req.config = Configuration(ids_.next(), std::vector<double>(v.begin(), v.end()));
    }
  }
  ++proposed_;
  in_flight_ = true;
  return req;
}

std::vector<RequestId> BoEi::ingest(const EvalRequest& request, const EvaluationResult& result) {
  in_flight_ = false;
  evaluated_.insert(std::vector<double>(request.config.values().begin(),
                                        request.config.values().end()));
  model_.add(request.config, request.budget, result.accuracy);
  track_incumbent(incumbent_, benchmark_, request, result.accuracy,
                  [&](nlohmann::json f) { emit("incumbent", std::move(f)); });
  return {};
}

std::vector<RequestId> BoEi::ingest_failure(const EvalRequest& request, const std::string&) {
  in_flight_ = false;
  evaluated_.insert(std::vector<double>(request.config.values().begin(),
                                        request.config.values().end()));
  return {};
}

}  // namespace hyperjump
