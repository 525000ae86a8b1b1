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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hyperjump/bench.hpp"
#include "hyperjump/engine.hpp"
#include "hyperjump/exec.hpp"
#include "hyperjump/optimizer.hpp"

namespace hyperjump {

/// Everything needed to reproduce a set of seeded runs.
struct ExperimentSpec {
  std::string benchmark = "synthetic:quad-exp";  // synthetic:<name> or tabular:<path>
  std::string optimizer = "hyperjump";          // hyperjump | hb | sh | rs | bo-ei
  double max_budget = 81.0;
  int eta = 3;
  OptimizerPolicy policy;
  std::size_t workers = 1;
  std::vector<std::uint64_t> seeds = {1};
  std::optional<double> time_limit;
  std::optional<std::size_t> max_evals;
  std::optional<double> target_loss;
  double noise = 0.0;  // synthetic benchmarks only
  /// Declared search space of a tabular benchmark; inferred from the table
  /// when absent.
  std::optional<SearchSpace> space;
  std::string out_dir = "runs";
  bool record_wall_clock = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  StopCondition stop() const;

  nlohmann::json to_json() const;
  /// Unknown keys are rejected. Missing keys keep their defaults.
  static ExperimentSpec from_json(const nlohmann::json& j);
  static ExperimentSpec load(const std::filesystem::path& path);
};

std::vector<std::string> optimizer_names();

/// Seeds 1..count.
std::vector<std::uint64_t> seed_range(std::size_t count);

/// Benchmark for one seed (synthetic noise is keyed by the seed).
std::unique_ptr<Benchmark> make_benchmark(const ExperimentSpec& spec, std::uint64_t seed);
std::unique_ptr<Optimizer> make_optimizer(const ExperimentSpec& spec, const Benchmark& benchmark,
                                          std::uint64_t seed);

/// One seeded run (sequential when workers == 1).
RunResult run_once(const ExperimentSpec& spec, const Benchmark& benchmark, std::uint64_t seed,
                   EventLog* log = nullptr);

struct SeedArtifacts {
  std::uint64_t seed = 0;
  std::filesystem::path log;
  std::filesystem::path trajectory;
  RunResult result;
};

struct ExperimentArtifacts {
  std::filesystem::path manifest;
  std::vector<SeedArtifacts> seeds;
};

/// Writes events_seed<k>.ndjson and trajectory_seed<k>.csv per seed plus
/// manifest.json into spec.out_dir.
ExperimentArtifacts run_experiment(const ExperimentSpec& spec);

struct TargetSummary {
  double target = 0.0;
  std::vector<std::optional<double>> times;  // per run, nullopt = unreached
  std::optional<double> median;              // unreached runs count as +inf
};

struct AggregateTable {
  std::vector<std::string> runs;  // trajectory file names
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> stddev;  // n - 1 denominator, 0 for a single run
  std::vector<double> median;
  std::vector<TargetSummary> targets;
};

/// Aligns every trajectory_*.csv of `dir` as a step function on the union of
/// breakpoints. Throws std::invalid_argument when there is no trajectory.
AggregateTable aggregate(const std::filesystem::path& dir, std::span<const double> targets = {});
AggregateTable aggregate(std::span<const std::vector<TrajectoryPoint>> runs,
                         std::span<const double> targets = {});
void write_aggregate(const AggregateTable& table, const std::filesystem::path& dir);

/// Parameters accepted by sweep().
std::vector<std::string> sweep_parameters();

/// One experiment per value in `<out_dir>/<parameter>=<value>`.
std::vector<std::filesystem::path> sweep(const ExperimentSpec& spec, const std::string& parameter,
                                         std::span<const double> values);

}  // namespace hyperjump
