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

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hyperjump/engine.hpp"
#include "hyperjump/optimizer.hpp"

namespace hyperjump {

/// Plain HyperBand: uniform sampling per bracket, SH promotion by measured
/// accuracy, random order within a stage.
class HyperBand final : public BracketScheduler {
 public:
  HyperBand(const Benchmark& benchmark, double max_budget, int eta, std::uint64_t seed)
      : BracketScheduler(benchmark, {max_budget, eta, seed, false}) {}
  std::string name() const override { return "hb"; }
};

/// Successive Halving: the largest HyperBand bracket, repeated.
class SuccessiveHalving final : public BracketScheduler {
 public:
  SuccessiveHalving(const Benchmark& benchmark, double max_budget, int eta, std::uint64_t seed)
      : BracketScheduler(benchmark, {max_budget, eta, seed, true}) {}
  std::string name() const override { return "sh"; }
};

/// Independent uniform configurations, always at the maximum budget.
class RandomSearch final : public Optimizer {
 public:
  RandomSearch(const Benchmark& benchmark, std::uint64_t seed);

  std::string name() const override { return "rs"; }
  std::optional<EvalRequest> propose() override;
  std::vector<RequestId> ingest(const EvalRequest& request, const EvaluationResult& result) override;
  std::vector<RequestId> ingest_failure(const EvalRequest& request,
                                        const std::string& reason) override;
  const Incumbent& incumbent() const override { return incumbent_; }

 private:
  const Benchmark& benchmark_;
  Rng rng_;
  ConfigIdSequence ids_;
  RequestId next_request_ = 1;
  Incumbent incumbent_;
};

struct BoEiOptions {
  std::uint64_t seed = 0;
  std::size_t pool_size = 1000;
  SurrogateOptions surrogate;
  ModelState::Schedule schedule;
};

/// Full-budget Bayesian optimization: d + 1 uniform initial evaluations, then
/// the expected-improvement maximizer over a fresh uniform pool each step.
/// Strictly sequential.
class BoEi final : public Optimizer {
 public:
  BoEi(const Benchmark& benchmark, BoEiOptions options);

  std::string name() const override { return "bo-ei"; }
  std::optional<EvalRequest> propose() override;
  std::vector<RequestId> ingest(const EvalRequest& request, const EvaluationResult& result) override;
  std::vector<RequestId> ingest_failure(const EvalRequest& request,
                                        const std::string& reason) override;
  const Incumbent& incumbent() const override { return incumbent_; }
  bool supports_parallel() const override { return false; }

  std::size_t initial_design_size() const { return model_.min_observations(); }

 private:
  const Benchmark& benchmark_;
  BoEiOptions options_;
  Rng rng_;
  ConfigIdSequence ids_;
  ModelState model_;
  std::set<std::vector<double>> evaluated_;
  std::size_t proposed_ = 0;
  bool in_flight_ = false;
  RequestId next_request_ = 1;
  Incumbent incumbent_;
};

}  // namespace hyperjump
