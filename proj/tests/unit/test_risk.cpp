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
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "hyperjump/bracket.hpp"
#include "hyperjump/risk.hpp"
#include "oracles.hpp"

namespace hyperjump {
namespace {

using oracle::Member;

AccuracyDistribution to_dist(const Member& m) {
  return m.stddev > 0.0 ? AccuracyDistribution::gaussian(m.mean, m.stddev)
                        : AccuracyDistribution::point(m.mean);
}

double quad_ear(const std::vector<Member>& d, const std::vector<Member>& s) {
  std::vector<AccuracyDistribution> dd, ss;
  for (const auto& m : d) dd.push_back(to_dist(m));
  for (const auto& m : s) ss.push_back(to_dist(m));
  return expected_accuracy_reduction(MaxDistribution::of(dd), MaxDistribution::of(ss));
}

std::vector<Member> random_side(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> mean(0.3, 0.9);
  std::uniform_real_distribution<double> sd(0.005, 0.15);
  std::bernoulli_distribution is_point(0.4);
  std::vector<Member> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({mean(gen), is_point(gen) ? 0.0 : sd(gen)});
  return out;
}

// Budget-independent table of beliefs keyed by configuration id.
class TablePredictor : public AccuracyPredictor {
 public:
  explicit TablePredictor(std::map<ConfigId, Prediction> table) : table_(std::move(table)) {}
  Prediction predict(const Configuration& config, double) const override {
    ++calls;
    return table_.at(config.id());
  }
  mutable int calls = 0;

 private:
  std::map<ConfigId, Prediction> table_;
};

Configuration cfg(ConfigId id) { return Configuration(id, {static_cast<double>(id)}); }

TEST(AccuracyDistribution, TinyStddevCollapsesToPointMass) {
  EXPECT_TRUE(AccuracyDistribution::gaussian(0.5, 1e-10).is_point());
  EXPECT_FALSE(AccuracyDistribution::gaussian(0.5, 1e-3).is_point());
}

TEST(MaxDistribution, RejectsEmptyMembers) {
  EXPECT_THROW(MaxDistribution::of({}), std::invalid_argument);
}

TEST(MaxDistribution, AtomsOnly) {
  const std::vector<AccuracyDistribution> m = {AccuracyDistribution::point(0.3),
                                               AccuracyDistribution::point(0.7)};
  const MaxDistribution d = MaxDistribution::of(m);
  ASSERT_TRUE(d.atom().has_value());
  EXPECT_EQ(*d.atom(), 0.7);
  EXPECT_TRUE(d.gaussians().empty());
  EXPECT_EQ(d.cdf(0.69), 0.0);
  EXPECT_EQ(d.cdf(0.7), 1.0);
}

TEST(MaxDistribution, TwoStandardNormalsAtMedian) {
  const std::vector<AccuracyDistribution> m = {AccuracyDistribution::gaussian(0, 1),
                                               AccuracyDistribution::gaussian(0, 1)};
  EXPECT_NEAR(MaxDistribution::of(m).cdf(0.0), 0.25, 1e-12);
}

TEST(MaxDistribution, AtomGatesGaussianCdf) {
  const std::vector<AccuracyDistribution> m = {AccuracyDistribution::point(0.5),
                                               AccuracyDistribution::gaussian(0.5, 0.1)};
  const MaxDistribution d = MaxDistribution::of(m);
  EXPECT_NEAR(d.cdf(0.5), 0.5, 1e-12);
  EXPECT_EQ(d.cdf(0.4999), 0.0);
  const std::vector<Member> mc = {{0.5, 0.0}, {0.5, 0.1}};
  for (double x : {0.5, 0.55, 0.6, 0.7}) {
    EXPECT_NEAR(d.cdf(x), oracle::monte_carlo_max_cdf(mc, x, 1000000, 17), 2e-3) << x;
  }
}

TEST(MaxDistribution, CdfIsMonotoneWithComplementarySf) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<AccuracyDistribution> m;
    for (const auto& x : random_side(gen, 1 + trial % 6)) m.push_back(to_dist(x));
    const MaxDistribution d = MaxDistribution::of(m);
    double prev = 0.0;
    for (double x = -0.5; x <= 1.5; x += 0.01) {
      const double f = d.cdf(x);
      EXPECT_GE(f, prev);
      EXPECT_NEAR(f + d.sf(x), 1.0, 1e-12);
      prev = f;
    }
    EXPECT_LT(d.cdf(-10.0), 1e-12);
    EXPECT_NEAR(d.cdf(10.0), 1.0, 1e-12);
  }
}

TEST(Ear, DeterministicExamples) {
  EXPECT_EQ(quad_ear({{0.5, 0.0}}, {{0.7, 0.0}}), 0.0);
  EXPECT_NEAR(quad_ear({{0.8, 0.0}}, {{0.6, 0.0}}), 0.2, 1e-9);
}

TEST(Ear, GaussianAgainstAtomAtItsMean) {
  EXPECT_NEAR(quad_ear({{0.7, 0.1}}, {{0.7, 0.0}}), 0.1 / std::sqrt(2.0 * M_PI), 1e-4);
  const double mc = oracle::monte_carlo_ear(std::vector<Member>{{0.7, 0.1}},
                                            std::vector<Member>{{0.7, 0.0}}, 1000000, 3);
  EXPECT_NEAR(mc, 0.1 / std::sqrt(2.0 * M_PI), 0.01 * 0.039894);
}

TEST(Ear, MatchesMonteCarloOnRandomMixedSets) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::size_t> size(1, 10);
  for (int trial = 0; trial < 12; ++trial) {
    const auto d = random_side(gen, size(gen));
    const auto s = random_side(gen, size(gen));
    const double q = quad_ear(d, s);
    const double mc = oracle::monte_carlo_ear(d, s, 1000000, 100 + trial);
    EXPECT_NEAR(q, mc, std::max(1e-3, 0.01 * std::abs(mc))) << "trial " << trial;
  }
}

TEST(Ear, ZeroWhenDiscardedSupportIsBelowSelected) {
  EXPECT_EQ(quad_ear({{0.2, 0.0}, {0.4, 0.0}}, {{0.4, 0.0}, {0.1, 0.0}}), 0.0);
}

TEST(Ear, StrictlyPositiveWheneverDiscardedCanWin) {
  // Eighty standard deviations below the selected atom: far past underflow.
  const double e = quad_ear({{0.1, 0.001}}, {{0.9, 0.0}});
  EXPECT_GT(e, 0.0);
  EXPECT_LT(e, 1e-300);
  EXPECT_GT(quad_ear({{0.5, 0.0}}, {{0.95, 0.005}}), 0.0);
}

TEST(Ear, MovingAMemberToTheSelectionNeverIncreasesIt) {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  for (int trial = 0; trial < 40; ++trial) {
    auto d = random_side(gen, size(gen));
    auto s = random_side(gen, size(gen));
    const double before = quad_ear(d, s);
    s.push_back(d.back());
    d.pop_back();
    EXPECT_LE(quad_ear(d, s), before + 2e-6) << "trial " << trial;
  }
}

TEST(Ear, RejectsNonFiniteInputs) {
  EXPECT_THROW(quad_ear({{std::numeric_limits<double>::infinity(), 0.0}}, {{0.5, 0.0}}),
               std::domain_error);
}

TEST(RelativeEar, Ratio) {
  EXPECT_NEAR(relative_ear(0.02, 0.2), 0.1, 1e-15);
  EXPECT_EQ(relative_ear(0.0, 0.3), 0.0);
  EXPECT_THROW(relative_ear(0.1, 0.0), std::invalid_argument);
  EXPECT_THROW(relative_ear(0.1, -1.0), std::invalid_argument);
}

TEST(Selection, SizesAndLogs) {
  EXPECT_EQ(selection_size(27, 3), 9u);
  EXPECT_EQ(selection_size(2, 3), 1u);
  EXPECT_EQ(floor_log(9, 3), 2);
  EXPECT_EQ(floor_log(8, 3), 1);
  EXPECT_EQ(floor_log(1, 3), 0);
  EXPECT_EQ(floor_log(8, 2), 3);
}

std::vector<StageMember> random_members(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<StageMember> out;
  const auto side = random_side(gen, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({cfg(i), to_dist(side[i]), side[i].stddev == 0.0});
  }
  return out;
}

TEST(CandidateSets, GeneratedCountAndSizes) {
  struct Case {
    std::size_t n;
    int eta;
  };
  for (const Case c : {Case{27, 3}, Case{81, 3}, Case{16, 2}}) {
    const auto members = random_members(c.n, c.n * 31 + c.eta);
    const auto sets = candidate_sets(members, c.eta);
    const std::size_t k = c.n / static_cast<std::size_t>(c.eta);
    // 1 + 2 floor(log_eta k), written out for the three cases.
    const std::size_t expected = c.n == 27 ? 5u : 7u;
    EXPECT_EQ(sets.generated, expected);
    EXPECT_LE(sets.sets.size(), expected);
    for (const auto& s : sets.sets) {
      EXPECT_EQ(s.size(), k);
      std::set<std::size_t> distinct(s.begin(), s.end());
      EXPECT_EQ(distinct.size(), k);
      for (std::size_t i : s) EXPECT_LT(i, c.n);
    }
  }
}

TEST(CandidateSets, NineMemberHandTrace) {
  // Scores: 0.9 0.8 0.5 (measured), then predicted means with stddevs.
  const std::vector<Member> m = {{0.9, 0.0},  {0.8, 0.0},  {0.5, 0.0},
                                 {0.75, 0.01}, {0.6, 0.2},  {0.4, 0.3},
                                 {0.3, 0.01}, {0.2, 0.05}, {0.1, 0.7}};
  std::vector<StageMember> members;
  for (std::size_t i = 0; i < m.size(); ++i) members.push_back({cfg(i), to_dist(m[i]), i < 3});
  const auto sets = candidate_sets(members, 3);
  // k = 3, one replacement round. Top-3 by score {0, 1, 3}. Accuracy variant
  // swaps 3 for the best remaining (4). Confidence variant drops the lowest
  // LCB in the top (3: 0.737) for the highest UCB outside it (8: 0.997).
  ASSERT_EQ(sets.generated, 3u);
  ASSERT_EQ(sets.sets.size(), 3u);
  const auto sorted = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted(sets.sets[0]), (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ(sorted(sets.sets[1]), (std::vector<std::size_t>{0, 1, 4}));
  EXPECT_EQ(sorted(sets.sets[2]), (std::vector<std::size_t>{0, 1, 8}));
}

TEST(CandidateSets, AllTestedTopSetIsTrueTopK) {
  std::vector<StageMember> members;
  const std::vector<double> acc = {0.4, 0.9, 0.1, 0.7, 0.8, 0.3, 0.6, 0.5, 0.2};
  for (std::size_t i = 0; i < acc.size(); ++i) {
    members.push_back({cfg(i), AccuracyDistribution::point(acc[i]), true});
  }
  const auto sets = candidate_sets(members, 3);
  std::vector<std::size_t> top = sets.sets[0];
  std::sort(top.begin(), top.end());
  EXPECT_EQ(top, (std::vector<std::size_t>{1, 3, 4}));
  // Confidence bounds equal accuracies, so the (c) variant equals the (b) one
  // and is deduplicated.
  EXPECT_EQ(sets.generated, 3u);
  EXPECT_EQ(sets.sets.size(), 2u);
}

TEST(CandidateSets, RejectsStagesSmallerThanEta) {
  const auto members = random_members(2, 1);
  EXPECT_THROW(candidate_sets(members, 3), std::invalid_argument);
}

TEST(CandidateSets, TestedAndUntestedWrapper) {
  std::map<ConfigId, Prediction> table;
  for (ConfigId i = 3; i < 9; ++i) table[i] = {0.1 * static_cast<double>(i) - 0.2, 0.05};
  const TablePredictor model(table);
  std::vector<TestedConfig> tested = {{cfg(0), 0.95}, {cfg(1), 0.2}, {cfg(2), 0.1}};
  std::vector<Configuration> untested;
  for (ConfigId i = 3; i < 9; ++i) untested.push_back(cfg(i));
  const auto sets = get_candidates_for_selection(tested, untested, model, 1.0, 3);
  ASSERT_FALSE(sets.sets.empty());
  std::set<ConfigId> top;
  for (const auto& c : sets.sets[0]) top.insert(c.id());
  EXPECT_EQ(top, (std::set<ConfigId>{0, 7, 8}));
}

TEST(PredictionCache, MemoizesPerIdAndBudget) {
  const TablePredictor model({{1, {0.5, 0.1}}, {2, {0.6, 0.1}}});
  const PredictionCache cache(model);
  cache.predict(cfg(1), 1.0);
  cache.predict(cfg(1), 1.0);
  cache.predict(cfg(1), 3.0);
  const std::vector<Configuration> batch = {cfg(1), cfg(2)};
  cache.prefetch(batch, 1.0);
  EXPECT_EQ(model.calls, 3);
  EXPECT_EQ(cache.predict(cfg(2), 1.0).mean, 0.6);
  EXPECT_EQ(model.calls, 3);
}

// Stage 0 of a 27-configuration, 4-stage bracket where a few measured
// configurations lead and the rest are predicted with moderate uncertainty.
struct JumpFixture {
  BracketPlan plan = make_bracket(27.0, 3, 4, 27);
  std::vector<TestedConfig> tested;
  std::vector<Configuration> untested;
  std::map<ConfigId, Prediction> table;

  explicit JumpFixture(std::uint64_t seed, double sd = 0.05) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> mean(0.2, 0.8);
    for (ConfigId i = 0; i < 27; ++i) {
      if (i < 6) {
        tested.push_back({cfg(i), mean(gen)});
        table[i] = {tested.back().accuracy, 0.0};
      } else {
        untested.push_back(cfg(i));
        table[i] = {mean(gen), sd};
      }
    }
  }

  JumpRiskInput input(double lambda) const {
    JumpRiskInput in;
    in.stage = 0;
    in.tested = tested;
    in.untested = untested;
    in.plan = &plan;
    in.lambda = lambda;
    in.incumbent_loss = 0.2;
    in.incumbent_accuracy = 0.8;
    return in;
  }
};

TEST(EvaluateJumpRisk, HugeLambdaAbandonsTheBracket) {
  const JumpFixture fx(1);
  const TablePredictor model(fx.table);
  const JumpDecision d = evaluate_jump_risk(fx.input(1e9), model);
  EXPECT_EQ(d.target_stage, fx.plan.stages());
  EXPECT_TRUE(d.selected.empty());
  EXPECT_FALSE(d.blocking_rear.has_value());
  EXPECT_EQ(d.hops.size(), static_cast<std::size_t>(fx.plan.stages()));
}

TEST(EvaluateJumpRisk, FinalStageIsKeptWithoutAnIncumbent) {
  const JumpFixture fx(1);
  const TablePredictor model(fx.table);
  JumpRiskInput in = fx.input(1e9);
  in.incumbent_accuracy.reset();
  const JumpDecision d = evaluate_jump_risk(in, model);
  EXPECT_EQ(d.target_stage, fx.plan.stages() - 1);
  EXPECT_EQ(d.selected.size(), fx.plan.size(fx.plan.stages() - 1));
  ASSERT_TRUE(d.blocking_rear.has_value());
  EXPECT_TRUE(std::isinf(*d.blocking_rear));
}

TEST(EvaluateJumpRisk, ZeroLambdaNeverJumps) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const JumpFixture fx(seed);
    const TablePredictor model(fx.table);
    const JumpDecision d = evaluate_jump_risk(fx.input(0.0), model);
    EXPECT_EQ(d.target_stage, 0);
    EXPECT_EQ(d.selected.size(), 9u);
    ASSERT_TRUE(d.blocking_rear.has_value());
    EXPECT_GT(*d.blocking_rear, 0.0);
  }
}

TEST(EvaluateJumpRisk, DominatingMeasuredTopClearsTheFirstHop) {
  // Two stages, nine configurations: the three measured leaders sit far above
  // every predicted member, so discarding the other six is essentially free.
  const BracketPlan plan = make_bracket(9.0, 3, 2, 9);
  std::vector<TestedConfig> tested = {{cfg(0), 0.9}, {cfg(1), 0.85}, {cfg(2), 0.8}};
  std::vector<Configuration> untested;
  std::map<ConfigId, Prediction> table;
  std::map<ConfigId, Prediction> seeded = {{0, {0.9, 0.01}}, {1, {0.85, 0.01}}, {2, {0.8, 0.01}}};
  table.swap(seeded);
  std::vector<Member> d_side;
  for (ConfigId i = 3; i < 9; ++i) {
    untested.push_back(cfg(i));
    table[i] = {0.3, 0.01};
    d_side.push_back({0.3, 0.01});
  }
  const TablePredictor model(table);
  JumpRiskInput in;
  in.stage = 0;
  in.tested = tested;
  in.untested = untested;
  in.plan = &plan;
  in.lambda = 0.1;
  in.incumbent_loss = 0.2;
  const JumpDecision d = evaluate_jump_risk(in, model);
  ASSERT_GE(d.hops.size(), 1u);
  EXPECT_LT(d.hops[0].min_rear, 1e-12);
  const double mc = oracle::monte_carlo_ear(
      d_side, std::vector<Member>{{0.9, 0.0}, {0.85, 0.0}, {0.8, 0.0}}, 100000, 5);
  EXPECT_EQ(mc, 0.0);
  EXPECT_EQ(d.target_stage, 1);
  std::set<ConfigId> kept;
  for (const auto& c : d.selected) kept.insert(c.id());
  EXPECT_EQ(kept, (std::set<ConfigId>{0, 1, 2}));

  // The same hop carries (essentially) no risk, but a zero threshold accepts none.
  in.lambda = 0.0;
  EXPECT_EQ(evaluate_jump_risk(in, model).target_stage, 0);
}

TEST(EvaluateJumpRisk, ZeroLambdaBlocksExactlyRiskFreeHops) {
  // Measured discards below a measured selected member: EAR is exactly 0.
  const BracketPlan plan = make_bracket(9.0, 3, 2, 3);
  std::vector<TestedConfig> tested = {{cfg(0), 0.9}, {cfg(1), 0.5}, {cfg(2), 0.4}};
  const TablePredictor model({{0, {0.9, 0.01}}});
  JumpRiskInput in;
  in.tested = tested;
  in.plan = &plan;
  in.incumbent_loss = 0.3;
  in.lambda = 0.0;
  const JumpDecision blocked = evaluate_jump_risk(in, model);
  EXPECT_EQ(blocked.target_stage, 0);
  ASSERT_TRUE(blocked.blocking_rear.has_value());
  EXPECT_EQ(*blocked.blocking_rear, 0.0);
  in.lambda = 1e-12;
  EXPECT_EQ(evaluate_jump_risk(in, model).target_stage, 1);
}

TEST(EvaluateJumpRisk, EachHopTakesTheMinimumOverItsCandidates) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const JumpFixture fx(seed);
    const TablePredictor model(fx.table);
    const JumpDecision d = evaluate_jump_risk(fx.input(0.1), model);
    ASSERT_FALSE(d.hops.empty());
    const auto sets =
        get_candidates_for_selection(fx.tested, fx.untested, model, fx.plan.budget(0), 3);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : sets.sets) {
      std::set<ConfigId> chosen;
      for (const auto& c : s) chosen.insert(c.id());
      std::vector<AccuracyDistribution> sd, dd;
      for (const auto& [id, p] : fx.table) {
        (chosen.contains(id) ? sd : dd).push_back(AccuracyDistribution::gaussian(p.mean, p.stddev));
      }
      const double ear = expected_accuracy_reduction(MaxDistribution::of(dd), MaxDistribution::of(sd));
      best = std::min(best, relative_ear(ear, 0.2));
    }
    EXPECT_DOUBLE_EQ(d.hops[0].min_rear, best) << "seed " << seed;
  }
}

TEST(EvaluateJumpRisk, AccumulatedRiskStaysWithinLambda) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    for (double lambda : {0.01, 0.1, 0.5}) {
      const JumpFixture fx(seed, 0.002 + 0.002 * static_cast<double>(seed));
      const TablePredictor model(fx.table);
      const JumpDecision d = evaluate_jump_risk(fx.input(lambda), model);
      EXPECT_GE(d.target_stage, 0);
      EXPECT_EQ(d.selected.empty(), d.target_stage == fx.plan.stages());
      double sum = 0.0;
      const std::size_t cleared = d.hops.size() - (d.blocking_rear ? 1 : 0);
      for (std::size_t h = 0; h < cleared; ++h) sum += d.hops[h].min_rear;
      EXPECT_NEAR(d.accumulated_rear, sum, 1e-12);
      if (d.target_stage > 0) EXPECT_LE(d.accumulated_rear, lambda);
      if (d.blocking_rear) EXPECT_GT(d.accumulated_rear + *d.blocking_rear, lambda);
      // 1 + 2 floor(log_3 k) evaluations per inner hop, one for the last.
      int bound = 0;
      for (int s = 0; s + 1 < fx.plan.stages(); ++s) {
        bound += 1 + 2 * floor_log(selection_size(fx.plan.size(s), 3), 3);
      }
      EXPECT_LE(d.rear_evaluations, bound + 1);
    }
  }
}

TEST(EvaluateJumpRisk, FinalHopComparesAgainstTheIncumbent) {
  const BracketPlan plan = make_bracket(9.0, 3, 1, 5);
  std::vector<Configuration> untested;
  std::map<ConfigId, Prediction> table;
  std::vector<Member> d_side;
  for (ConfigId i = 0; i < 5; ++i) {
    untested.push_back(cfg(i));
    table[i] = {0.6 + 0.05 * static_cast<double>(i), 0.05};
    d_side.push_back({table[i].mean, 0.05});
  }
  const TablePredictor model(table);
  JumpRiskInput in;
  in.stage = 0;
  in.untested = untested;
  in.plan = &plan;
  in.lambda = 1e9;
  in.incumbent_loss = 0.1;
  in.incumbent_accuracy = 0.9;
  const JumpDecision d = evaluate_jump_risk(in, model);
  EXPECT_EQ(d.target_stage, 1);
  ASSERT_EQ(d.hops.size(), 1u);
  const double mc =
      oracle::monte_carlo_ear(d_side, std::vector<Member>{{0.9, 0.0}}, 1000000, 8);
  EXPECT_NEAR(d.hops[0].min_rear * 0.1, mc, std::max(1e-3, 0.01 * mc));
}

TEST(EvaluateJumpRisk, RejectsBadInputs) {
  const JumpFixture fx(1);
  const TablePredictor model(fx.table);
  JumpRiskInput in = fx.input(0.1);
  in.plan = nullptr;
  EXPECT_THROW(evaluate_jump_risk(in, model), std::invalid_argument);
  in = fx.input(0.1);
  in.stage = fx.plan.stages();
  EXPECT_THROW(evaluate_jump_risk(in, model), std::invalid_argument);
}

}  // namespace
}  // namespace hyperjump
