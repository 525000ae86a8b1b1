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

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "hyperjump/bench.hpp"
#include "hyperjump/bracket.hpp"
#include "hyperjump/engine.hpp"
#include "hyperjump/exec.hpp"
#include "hyperjump/risk.hpp"
#include "hyperjump/surrogate.hpp"

namespace hj = hyperjump;

namespace {

std::vector<hj::AccuracyDistribution> mixed_side(hj::Rng& rng, std::size_t n) {
  std::vector<hj::AccuracyDistribution> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = rng.uniform(0.3, 0.9);
    out.push_back(i % 3 == 0 ? hj::AccuracyDistribution::point(m)
                             : hj::AccuracyDistribution::gaussian(m, rng.uniform(0.01, 0.1)));
  }
  return out;
}

std::vector<hj::Observation> toy_observations(const hj::Benchmark& bench, std::size_t n,
                                              std::uint64_t seed) {
  hj::Rng rng(seed);
  std::vector<hj::Observation> obs;
  for (std::size_t i = 0; i < n; ++i) {
    hj::Observation o;
    o.config = hj::sample_uniform(bench.space(), rng, i + 1);
    o.budget = std::pow(3.0, static_cast<double>(rng.uniform_int(0, 4)));
    o.accuracy = bench.accuracy(o.config, o.budget);
    o.cost = bench.cumulative_cost(o.config, o.budget);
    obs.push_back(o);
  }
  return obs;
}

void BM_ExpectedAccuracyReduction(benchmark::State& state) {
  hj::Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = hj::MaxDistribution::of(mixed_side(rng, n));
  const auto s = hj::MaxDistribution::of(mixed_side(rng, n));
  for (auto _ : state) benchmark::DoNotOptimize(hj::expected_accuracy_reduction(d, s));
}
BENCHMARK(BM_ExpectedAccuracyReduction)->Arg(1)->Arg(5)->Arg(27)->Arg(54);

void BM_SurrogateFit(benchmark::State& state) {
  const auto bench = hj::make_toy_benchmark("quad-exp");
  const auto obs = toy_observations(*bench, static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hj::SurrogateModel::fit(obs, bench->space(), 81.0));
  }
}
BENCHMARK(BM_SurrogateFit)->Arg(20)->Arg(80)->Arg(150)->Unit(benchmark::kMillisecond);

void BM_SurrogateCondition(benchmark::State& state) {
  const auto bench = hj::make_toy_benchmark("quad-exp");
  const auto obs = toy_observations(*bench, static_cast<std::size_t>(state.range(0)), 3);
  const hj::KernelParams p = hj::KernelParams::defaults(bench->space().encoded_width());
  for (auto _ : state) {
    benchmark::DoNotOptimize(hj::SurrogateModel::condition(obs, bench->space(), 81.0, p));
  }
}
BENCHMARK(BM_SurrogateCondition)->Arg(150)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

// Risk evaluation and ordering on a first stage of 81 configurations with a
// third of it measured.
struct StageFixture {
  std::unique_ptr<hj::SyntheticBenchmark> bench = hj::make_toy_benchmark("quad-exp");
  hj::BracketPlan plan = hj::make_bracket(81.0, 3, 5, 81);
  std::vector<hj::TestedConfig> tested;
  std::vector<hj::Configuration> untested;
  std::optional<hj::SurrogateModel> model;

  StageFixture() {
    hj::Rng rng(4);
    for (std::size_t i = 0; i < 81; ++i) {
      auto c = hj::sample_uniform(bench->space(), rng, i + 1);
      if (i < 27) {
        tested.push_back({c, bench->accuracy(c, 1.0)});
      } else {
        untested.push_back(c);
      }
    }
    model = hj::SurrogateModel::fit(toy_observations(*bench, 120, 5), bench->space(), 81.0);
  }
};

void BM_JumpRisk81(benchmark::State& state) {
  const StageFixture f;
  hj::JumpRiskInput in;
  in.tested = f.tested;
  in.untested = f.untested;
  in.plan = &f.plan;
  in.incumbent_loss = 0.1;
  in.incumbent_accuracy = 0.9;
  for (auto _ : state) benchmark::DoNotOptimize(hj::evaluate_jump_risk(in, *f.model));
}
BENCHMARK(BM_JumpRisk81)->Unit(benchmark::kMillisecond);

void BM_NextConfToTest81(benchmark::State& state) {
  const StageFixture f;
  hj::OrderingInput in;
  in.tested = f.tested;
  in.pending = f.untested;
  in.plan = &f.plan;
  in.incumbent_loss = 0.1;
  in.incumbent_accuracy = 0.9;
  for (auto _ : state) benchmark::DoNotOptimize(hj::next_conf_to_test(in, *f.model));
}
BENCHMARK(BM_NextConfToTest81)->Unit(benchmark::kMillisecond);

// One full HyperBand iteration of simulated time; reports the mean wall-clock
// overhead per recommendation.
void BM_HyperJumpIteration(benchmark::State& state) {
  const auto bench = hj::make_toy_benchmark("quad-exp");
  double overhead = 0.0;
  std::size_t recs = 0;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    hj::HyperJumpOptions o;
    o.seed = seed++;
    hj::HyperJump opt(*bench, o);
    hj::StopCondition stop;
    stop.time_limit = 1902.0;
    const auto r = hj::run_sequential(opt, *bench, stop);
    overhead += r.overhead_seconds;
    recs += r.recommendations;
  }
  state.counters["sec_per_recommendation"] = recs ? overhead / static_cast<double>(recs) : 0.0;
}
BENCHMARK(BM_HyperJumpIteration)->Iterations(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
