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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hyperjump/bench.hpp"
#include "oracles.hpp"

namespace hyperjump {
namespace {

std::filesystem::path tmp_path(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(HYPERJUMP_TEST_TMP) / "bench";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SyntheticBenchmark linear_cost_benchmark(double noise = 0.0) {
  SyntheticBenchmark::Definition def;
  def.name = "lin";
  def.space = SearchSpace({Dimension::continuous("u", 0.0, 1.0)});
  def.max_budget = 27.0;
  def.peak = [](std::span<const double> v) { return 0.5 + 0.4 * v[0]; };
  def.rate = [](std::span<const double> v) { return 1.0 + 5.0 * v[0]; };
  def.cost = [](std::span<const double>, double b) { return b; };
  def.noise_stddev = noise;
  def.noise_seed = 3;
  return SyntheticBenchmark(std::move(def));
}

TEST(Synthetic, FullBudgetAccuracyFollowsTheCurve) {
  const auto bench = linear_cost_benchmark();
  const Configuration c(1, {0.5});
  EXPECT_NEAR(bench.accuracy(c, 27.0), 0.7 * (1.0 - std::exp(-3.5)), 1e-15);
  EXPECT_NEAR(bench.accuracy(c, 9.0), 0.7 * (1.0 - std::exp(-3.5 / 3.0)), 1e-15);
}

TEST(Synthetic, ResumeChargesOnlyTheDifference) {
  const auto bench = linear_cost_benchmark();
  const Configuration c(1, {0.2});
  const EvaluationResult r = bench.evaluate(c, 9.0, 3.0);
  EXPECT_DOUBLE_EQ(r.incremental_cost, 6.0);
  EXPECT_DOUBLE_EQ(r.accuracy, bench.accuracy(c, 9.0));
}

TEST(Synthetic, CostsTelescopeAlongARungLadder) {
  const auto bench = linear_cost_benchmark();
  const Configuration c(1, {0.9});
  const double total = bench.evaluate(c, 1.0).incremental_cost +
                       bench.evaluate(c, 3.0, 1.0).incremental_cost +
                       bench.evaluate(c, 9.0, 3.0).incremental_cost +
                       bench.evaluate(c, 27.0, 9.0).incremental_cost;
  EXPECT_DOUBLE_EQ(total, bench.cumulative_cost(c, 27.0));
}

TEST(Synthetic, SnapshotsMatchDirectEvaluation) {
  const auto bench = linear_cost_benchmark(0.02);
  const Configuration c(1, {0.3});
  const std::vector<double> rungs = {27.0, 1.0, 9.0, 3.0};
  const EvaluationResult r = bench.evaluate(c, 27.0, 1.0, rungs);
  ASSERT_EQ(r.snapshots.size(), 2u);
  EXPECT_EQ(r.snapshots[0].budget, 3.0);
  EXPECT_EQ(r.snapshots[1].budget, 9.0);
  for (const auto& s : r.snapshots) EXPECT_EQ(s.accuracy, bench.accuracy(c, s.budget));
  EXPECT_TRUE(bench.evaluate(c, 1.0, std::nullopt, rungs).snapshots.empty());
}

TEST(Synthetic, NoiseIsAFixedFunctionOfConfigurationAndBudget) {
  const auto a = linear_cost_benchmark(0.05);
  const auto b = linear_cost_benchmark(0.05);
  const Configuration c(1, {0.4});
  EXPECT_EQ(a.accuracy(c, 9.0), a.accuracy(c, 9.0));
  EXPECT_EQ(a.accuracy(c, 9.0), b.accuracy(Configuration(77, {0.4}), 9.0));
  EXPECT_NE(a.accuracy(c, 9.0), a.expected_accuracy(c.values(), 9.0));
}

TEST(Synthetic, NoiselessAccuracyIsMonotoneInBudget) {
  for (const std::string name : toy_suite()) {
    const auto bench = make_toy_benchmark(name);
    Rng rng(21);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> budget(1e-3, 81.0);
    for (int i = 0; i < 500; ++i) {
      const Configuration c = sample_uniform(bench->space(), rng);
      double lo = budget(gen), hi = budget(gen);
      if (lo > hi) std::swap(lo, hi);
      EXPECT_LE(bench->accuracy(c, lo), bench->accuracy(c, hi)) << name;
      EXPECT_GE(bench->accuracy(c, lo), 0.0);
      EXPECT_LE(bench->accuracy(c, hi), 1.0);
    }
  }
}

TEST(Synthetic, RejectsBadRequests) {
  const auto bench = linear_cost_benchmark();
  const Configuration c(1, {0.5});
  EXPECT_THROW(bench.evaluate(c, 0.0), std::out_of_range);
  EXPECT_THROW(bench.evaluate(c, 28.0), std::out_of_range);
  EXPECT_THROW(bench.evaluate(c, 9.0, 9.0), std::invalid_argument);
  EXPECT_THROW(bench.accuracy(Configuration(1, {1.5}), 9.0), UnknownConfigurationError);
}

constexpr const char* kTwoByTwo =
    "config_id,depth,kernel,budget,accuracy,cumulative_cost\n"
    "1,2,rbf,3,0.61,3\n"
    "1,2,rbf,9,0.72,9.5\n"
    "2,4,linear,3,0.55,2.25\n"
    "2,4,linear,9,0.8125,7\n";

TEST(Tabular, LookupsReturnTheAuthoredValues) {
  const auto path = tmp_path("two_by_two.csv");
  write_text(path, kTwoByTwo);
  const TabularBenchmark t = load_tabular(path);
  ASSERT_EQ(t.configurations().size(), 2u);
  EXPECT_EQ(t.max_budget(), 9.0);
  EXPECT_EQ(*t.declared_rungs(), (std::vector<double>{3.0, 9.0}));
  const Configuration a = t.configurations()[0];
  const Configuration b = t.configurations()[1];
  EXPECT_EQ(a.id(), 1u);
  EXPECT_EQ(t.accuracy(a, 3.0), 0.61);
  EXPECT_EQ(t.accuracy(a, 9.0), 0.72);
  EXPECT_EQ(t.cumulative_cost(a, 9.0), 9.5);
  EXPECT_EQ(t.accuracy(b, 9.0), 0.8125);
  EXPECT_EQ(t.evaluate(b, 9.0, 3.0).incremental_cost, 7.0 - 2.25);
  EXPECT_THROW(t.accuracy(a, 5.0), std::out_of_range);
  const Configuration other(9, {1.0, 1.0});
  EXPECT_THROW(t.accuracy(other, 3.0), UnknownConfigurationError);
}

TEST(Tabular, WriteThenReadIsIdentity) {
  const auto path = tmp_path("round_trip.csv");
  write_text(path, kTwoByTwo);
  const TabularBenchmark t = load_tabular(path);
  const auto copy = tmp_path("round_trip_copy.csv");
  t.write(copy);
  const std::string first = read_text(copy);
  const TabularBenchmark back = load_tabular(copy, t.space());
  const auto again = tmp_path("round_trip_again.csv");
  back.write(again);
  EXPECT_EQ(read_text(again), first);
  for (const auto& c : t.configurations()) {
    for (double b : {3.0, 9.0}) {
      EXPECT_EQ(back.lookup(c, b).accuracy, t.lookup(c, b).accuracy);
      EXPECT_EQ(back.lookup(c, b).cumulative_cost, t.lookup(c, b).cumulative_cost);
    }
  }
}

TEST(Tabular, MissingPairIsASparseTableError) {
  const auto path = tmp_path("sparse.csv");
  write_text(path,
             "config_id,x,budget,accuracy,cumulative_cost\n"
             "1,0,1,0.5,1\n1,0,3,0.6,3\n2,1,1,0.4,1\n");
  try {
    load_tabular(path);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("sparse table"), std::string::npos) << e.what();
  }
}

TEST(Tabular, DuplicateRowIsRejected) {
  const auto path = tmp_path("dup.csv");
  write_text(path,
             "config_id,x,budget,accuracy,cumulative_cost\n"
             "1,0,1,0.5,1\n1,0,1,0.5,1\n");
  try {
    load_tabular(path);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate key"), std::string::npos) << e.what();
  }
}

TEST(Tabular, MalformedRowReportsItsLine) {
  const auto path = tmp_path("bad.csv");
  write_text(path,
             "config_id,x,budget,accuracy,cumulative_cost\n"
             "1,0,1,0.5,1\n1,0,3,oops,3\n");
  try {
    load_tabular(path);
    FAIL() << "expected an error";
  } catch (const TabularParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  write_text(path, "config_id,x,budget,accuracy,cumulative_cost\n1,0,1\n");
  EXPECT_THROW(load_tabular(path), TabularParseError);
  write_text(path, "id,x,budget,accuracy,cost\n");
  EXPECT_THROW(load_tabular(path), TabularParseError);
}

TEST(ToySuite, QuadExpOptimumIsTheBowlCenter) {
  const auto bench = make_toy_benchmark("quad-exp");
  const GridOptimum best = grid_optimum(*bench);
  EXPECT_EQ(best.values, (std::vector<double>{10.0, 4.0}));
  // Exhaustive check of the same grid.
  double top = -1.0;
  for (const auto& c : bench->space().enumerate_grid()) top = std::max(top, bench->accuracy(Configuration(0, c), 81.0));
  EXPECT_EQ(best.accuracy, top);
}

std::vector<double> rung_column(const Benchmark& bench, double budget) {
  std::vector<double> out;
  for (const auto& c : bench.space().enumerate_grid()) out.push_back(bench.accuracy(Configuration(0, c), budget));
  return out;
}

TEST(ToySuite, DeceptiveLowBudgetRankingIsInverted) {
  const auto bench = make_toy_benchmark("deceptive");
  const auto at_r = rung_column(*bench, 81.0);
  EXPECT_LT(oracle::spearman(rung_column(*bench, 1.0), at_r), 0.0);
  EXPECT_GT(oracle::spearman(rung_column(*bench, 9.0), at_r), 0.9);
  const GridOptimum best = grid_optimum(*bench);
  EXPECT_EQ(best.values, (std::vector<double>{3.0, 1.0}));
}

TEST(ToySuite, PlateauHasManyNearOptimalConfigurations) {
  const auto bench = make_toy_benchmark("plateau");
  const double best = grid_optimum(*bench).accuracy;
  const auto at_r = rung_column(*bench, 81.0);
  const auto near = std::count_if(at_r.begin(), at_r.end(), [&](double a) { return a >= best - 1e-3; });
  EXPECT_GE(near, 3);
}

TEST(ToySuite, NamesAndErrors) {
  EXPECT_EQ(toy_suite(), (std::vector<std::string>{"quad-exp", "deceptive", "plateau"}));
  EXPECT_THROW(make_toy_benchmark("nope"), std::invalid_argument);
  for (const auto& name : toy_suite()) {
    const auto bench = make_toy_benchmark(name);
    const Configuration c(0, bench->space().enumerate_grid().front());
    EXPECT_EQ(bench->cumulative_cost(c, 27.0), 27.0);
  }
}

}  // namespace
}  // namespace hyperjump
