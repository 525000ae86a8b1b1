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

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperjump/space.hpp"

namespace hyperjump {

struct Snapshot {
  double budget = 0.0;
  double accuracy = 0.0;
};

struct EvaluationResult {
  double accuracy = 0.0;
  double incremental_cost = 0.0;
  std::vector<Snapshot> snapshots;  // strictly ascending budgets below the requested one
};

class UnknownConfigurationError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Objective with a budget axis and cumulative cost accounting. Training can be
/// paused and resumed, so a re-evaluation from `resume_from` is charged only
/// the cost difference, and intermediate accuracies at lower rungs come for
/// free as snapshots.
class Benchmark {
 public:
  virtual ~Benchmark() = default;

  virtual std::string name() const = 0;
  virtual const SearchSpace& space() const = 0;
  virtual double max_budget() const = 0;

  /// Accuracy of `config` trained with `budget`.
  virtual double accuracy(const Configuration& config, double budget) const = 0;
  /// Cost of training `config` from scratch up to `budget`.
  virtual double cumulative_cost(const Configuration& config, double budget) const = 0;
  /// Budgets the benchmark can be queried at; nullopt means any in (0, R].
  virtual std::optional<std::vector<double>> declared_rungs() const { return std::nullopt; }

  /// Positive loss used to normalize risks; defaults to 1 - accuracy.
  virtual double loss(double accuracy) const { return 1.0 - accuracy; }

  /// Evaluates at `budget`, resuming from `resume_from` when given, and returns
  /// snapshots at every `snapshot_rungs` entry strictly between the two.
  EvaluationResult evaluate(const Configuration& config, double budget,
                            std::optional<double> resume_from = std::nullopt,
                            std::span<const double> snapshot_rungs = {}) const;
};

/// accuracy(c, b) = peak(c) * (1 - exp(-rate(c) * b / R)) + noise, clamped to
/// [0, 1]. Noise is a deterministic function of (configuration, budget, seed).
class SyntheticBenchmark final : public Benchmark {
 public:
  struct Definition {
    std::string name;
    SearchSpace space;
    double max_budget = 81.0;
    std::function<double(std::span<const double>)> peak;
    std::function<double(std::span<const double>)> rate;
    std::function<double(std::span<const double>, double)> cost;  // cumulative
    double noise_stddev = 0.0;
    std::uint64_t noise_seed = 0;
  };

  explicit SyntheticBenchmark(Definition def);

  std::string name() const override { return def_.name; }
  const SearchSpace& space() const override { return def_.space; }
  double max_budget() const override { return def_.max_budget; }
  double accuracy(const Configuration& config, double budget) const override;
  double cumulative_cost(const Configuration& config, double budget) const override;

  /// Noiseless accuracy.
  double expected_accuracy(std::span<const double> values, double budget) const;

 private:
  Definition def_;
};

struct TabularEntry {
  double accuracy = 0.0;
  double cumulative_cost = 0.0;
};

/// Dense lookup table of (configuration, budget rung) -> (accuracy, cost).
///
/// File format: UTF-8 comma-separated text with a header line
/// `config_id,<dimension columns...>,budget,accuracy,cumulative_cost` and one
/// newline-terminated row per (configuration, rung).
class TabularBenchmark final : public Benchmark {
 public:
  struct Row {
    ConfigId config_id = 0;
    std::vector<double> values;
    double budget = 0.0;
    TabularEntry entry;
  };

  /// Validates density and uniqueness; throws std::invalid_argument otherwise.
  TabularBenchmark(std::string name, SearchSpace space, std::vector<Row> rows);

  std::string name() const override { return name_; }
  const SearchSpace& space() const override { return space_; }
  double max_budget() const override { return rungs_.back(); }
  double accuracy(const Configuration& config, double budget) const override;
  double cumulative_cost(const Configuration& config, double budget) const override;
  std::optional<std::vector<double>> declared_rungs() const override { return rungs_; }

  /// Configurations in ascending id order.
  std::span<const Configuration> configurations() const { return configs_; }
  const TabularEntry& lookup(const Configuration& config, double budget) const;

  void write(const std::filesystem::path& path) const;

 private:
  std::size_t config_index(const Configuration& config) const;
  std::size_t rung_index(double budget) const;

  std::string name_;
  SearchSpace space_;
  std::vector<Configuration> configs_;
  std::vector<double> rungs_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_hash_;
  std::vector<std::vector<TabularEntry>> table_;  // [config][rung]
};

class TabularParseError : public std::runtime_error {
 public:
  TabularParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Loads a table. Without `space`, dimensions are inferred per column:
/// contiguous integers become integer dimensions, anything else categorical.
TabularBenchmark load_tabular(const std::filesystem::path& path,
                              const std::optional<SearchSpace>& space = std::nullopt);

/// Names accepted by make_toy_benchmark.
std::vector<std::string> toy_suite();

/// Desk-scale synthetic benchmarks on integer grids:
///  - "quad-exp": quadratic bowl peak (0.95 at the center), rate affine in one
///    coordinate, cost = budget;
///  - "deceptive": slow learners have the highest plateau, so low-budget
///    rankings invert the full-budget ranking;
///  - "plateau": a flat optimal disc shared by many configurations.
std::unique_ptr<SyntheticBenchmark> make_toy_benchmark(const std::string& name,
                                                       double max_budget = 81.0,
                                                       double noise_stddev = 0.0,
                                                       std::uint64_t noise_seed = 0);

/// Best full-budget accuracy over the grid of a discrete benchmark.
struct GridOptimum {
  std::vector<double> values;
  double accuracy = 0.0;
};
GridOptimum grid_optimum(const Benchmark& benchmark);

}  // namespace hyperjump
