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

#include <algorithm>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "hyperjump/baselines.hpp"
#include "hyperjump/exec.hpp"
#include "oracles.hpp"

namespace hyperjump {
namespace {

std::vector<nlohmann::json> events(const EventLog& log, const std::string& name) {
  std::vector<nlohmann::json> out;
  for (const auto& r : log.records()) {
    if (r.at("event") == name) out.push_back(r);
  }
  return out;
}

// Number of full-budget evaluations until the grid optimum is measured, capped.
std::size_t evals_to_optimum(Optimizer& opt, const Benchmark& bench, std::size_t cap) {
  const GridOptimum best = grid_optimum(bench);
  StopCondition stop;
  stop.max_evals = cap;
  stop.target_loss = bench.loss(best.accuracy) + 1e-12;
  const RunResult r = run_sequential(opt, bench, stop);
  return r.trajectory.back().incumbent_loss <= *stop.target_loss ? r.completed : cap + 1;
}

std::size_t median(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

TEST(HyperBand, FirstIterationMatchesTheBracketFormula) {
  const auto bench = make_toy_benchmark("quad-exp");
  HyperBand hb(*bench, 81, 3, 4);
  StopCondition stop;
  stop.time_limit = 1e9;
  stop.max_evals = 2000;
  EventLog log;
  run_sequential(hb, *bench, stop, &log);
  const auto starts = events(log, "bracket_start");
  const auto expected = oracle::hyperband_brackets(81, 3);
  ASSERT_GE(starts.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(starts[i].at("configs").get<std::size_t>(), expected[i].n0);
    EXPECT_DOUBLE_EQ(starts[i].at("budget").get<double>(), expected[i].b0);
  }
  EXPECT_TRUE(events(log, "jump").empty());
}

TEST(RandomSearch, OnePointSpaceAlwaysProposesThatPointAtFullBudget) {
  SyntheticBenchmark::Definition def;
  def.name = "single";
  def.space = SearchSpace({Dimension::categorical("only", {"a"})});
  def.max_budget = 27;
  def.peak = [](std::span<const double>) { return 0.7; };
  def.rate = [](std::span<const double>) { return 2.0; };
  def.cost = [](std::span<const double>, double b) { return b; };
  const SyntheticBenchmark bench(def);
  RandomSearch rs(bench, 9);
  std::set<ConfigId> ids;
  for (int i = 0; i < 20; ++i) {
    const auto req = rs.propose();
    ASSERT_TRUE(req.has_value());
    EXPECT_EQ(req->config[0], 0.0);
    EXPECT_EQ(req->budget, 27.0);
    ids.insert(req->config.id());
  }
  EXPECT_EQ(ids.size(), 20u);
}

TEST(RandomSearch, IncumbentIsTheBestMeasured) {
  const auto bench = make_toy_benchmark("plateau");
  RandomSearch rs(*bench, 5);
  StopCondition stop;
  stop.max_evals = 40;
  EventLog log;
  const RunResult r = run_sequential(rs, *bench, stop, &log);
  double best = 0.0;
  for (const auto& e : events(log, "eval_end")) best = std::max(best, e.at("accuracy").get<double>());
  EXPECT_DOUBLE_EQ(rs.incumbent().accuracy, best);
  EXPECT_DOUBLE_EQ(r.trajectory.back().incumbent_loss, bench->loss(best));
}

TEST(BoEi, InitialDesignThenModelOnFullBudget) {
  const auto bench = make_toy_benchmark("quad-exp");
  BoEi bo(*bench, {});
  EXPECT_EQ(bo.initial_design_size(), bench->space().size() + 1);
  std::set<std::vector<double>> seen;
  for (int i = 0; i < 12; ++i) {
    const auto req = bo.propose();
    ASSERT_TRUE(req.has_value());
    EXPECT_EQ(req->budget, 81.0);
    seen.insert({req->config.values().begin(), req->config.values().end()});
    EvaluationResult res;
    res.accuracy = bench->accuracy(req->config, req->budget);
    res.incremental_cost = bench->cumulative_cost(req->config, req->budget);
    bo.ingest(*req, res);
  }
  EXPECT_GE(seen.size(), 10u);  // the initial design may repeat, the model part does not
}

TEST(BoEi, OneRequestInFlight) {
  const auto bench = make_toy_benchmark("quad-exp");
  BoEi bo(*bench, {});
  ASSERT_TRUE(bo.propose().has_value());
  EXPECT_FALSE(bo.propose().has_value());
  EXPECT_FALSE(bo.supports_parallel());
}

TEST(BoEi, ReachesTheOptimumInFewerEvaluationsThanRandomSearch) {
  const auto bench = make_toy_benchmark("quad-exp");
  std::vector<std::size_t> bo_counts, rs_counts;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    BoEiOptions o;
    o.seed = seed;
    BoEi bo(*bench, o);
    RandomSearch rs(*bench, seed);
    bo_counts.push_back(evals_to_optimum(bo, *bench, 300));
    rs_counts.push_back(evals_to_optimum(rs, *bench, 300));
  }
  EXPECT_LT(median(bo_counts), median(rs_counts));
}

}  // namespace
}  // namespace hyperjump
