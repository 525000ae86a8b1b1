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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "hyperjump/rng.hpp"

namespace hyperjump {

enum class DimensionKind { kContinuous, kInteger, kCategorical };

/// One axis of a search space. Integer and categorical values are stored as
/// doubles: integers hold their integral value and categoricals hold the level
/// index.
struct Dimension {
  std::string name;
  DimensionKind kind = DimensionKind::kContinuous;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::string> levels;

  static Dimension continuous(std::string name, double lower, double upper);
  static Dimension integer(std::string name, std::int64_t lower, std::int64_t upper);
  static Dimension categorical(std::string name, std::vector<std::string> levels);

  /// Number of encoded coordinates (one-hot width for categoricals).
  std::size_t encoded_width() const;
  bool contains(double value) const;
  /// Number of admissible values, or nullopt for continuous dimensions.
  std::optional<std::size_t> cardinality() const;
};

using ConfigId = std::uint64_t;

/// A point of a search space. Equality and hashing are value-based; the id is
/// only a stable label for logs and deterministic tie-breaking.
class Configuration {
 public:
  Configuration() = default;
  Configuration(ConfigId id, std::vector<double> values)
      : id_(id), values_(std::move(values)) {}

  ConfigId id() const { return id_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.values_ == b.values_;
  }

 private:
  ConfigId id_ = 0;
  std::vector<double> values_;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const;
  std::size_t operator()(std::span<const double> values) const;
};

class SearchSpace {
 public:
  SearchSpace() = default;
  /// Throws std::invalid_argument when a dimension is malformed.
  explicit SearchSpace(std::vector<Dimension> dimensions);

  std::span<const Dimension> dimensions() const { return dimensions_; }
  std::size_t size() const { return dimensions_.size(); }
  const Dimension& operator[](std::size_t i) const { return dimensions_[i]; }

  /// Width of the hyper-parameter block of the encoding (budget excluded).
  std::size_t encoded_width() const { return encoded_width_; }

  bool contains(std::span<const double> values) const;

  /// Feature vector for the surrogate: min-max scaled numeric dimensions,
  /// one-hot categoricals, then the normalized budget budget / max_budget.
  Eigen::VectorXd encode(const Configuration& config, double budget, double max_budget) const;
  void encode_into(std::span<const double> values, double budget, double max_budget,
                   Eigen::Ref<Eigen::VectorXd> out) const;

  /// Product of all cardinalities; nullopt when any dimension is continuous.
  std::optional<std::size_t> grid_size() const;
  /// Every point of a fully discrete space, in row-major order over dimensions.
  std::vector<std::vector<double>> enumerate_grid() const;

  std::string format(std::span<const double> values) const;

  friend void to_json(nlohmann::json& j, const SearchSpace& space);
  friend void from_json(const nlohmann::json& j, SearchSpace& space);

 private:
  std::vector<Dimension> dimensions_;
  std::size_t encoded_width_ = 0;
};

/// Independent uniform draw per dimension.
Configuration sample_uniform(const SearchSpace& space, Rng& rng, ConfigId id = 0);

/// Hands out consecutive configuration ids.
class ConfigIdSequence {
 public:
  ConfigId next() { return next_++; }

 private:
  ConfigId next_ = 1;
};

}  // namespace hyperjump
