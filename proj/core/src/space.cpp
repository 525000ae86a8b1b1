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

#include "hyperjump/space.hpp"

#include <cmath>
#include <cstring>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hyperjump {

Dimension Dimension::continuous(std::string name, double lower, double upper) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimensionKind::kContinuous;
  d.lower = lower;
  d.upper = upper;
  return d;
}

Dimension Dimension::integer(std::string name, std::int64_t lower, std::int64_t upper) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimensionKind::kInteger;
  d.lower = static_cast<double>(lower);
  d.upper = static_cast<double>(upper);
  return d;
}

Dimension Dimension::categorical(std::string name, std::vector<std::string> levels) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimensionKind::kCategorical;
  d.levels = std::move(levels);
  d.lower = 0.0;
  d.upper = d.levels.empty() ? 0.0 : static_cast<double>(d.levels.size() - 1);
  return d;
}

std::size_t Dimension::encoded_width() const {
  return kind == DimensionKind::kCategorical ? levels.size() : 1;
}

bool Dimension::contains(double value) const {
  if (!std::isfinite(value)) return false;
  switch (kind) {
    case DimensionKind::kContinuous:
      return value >= lower && value <= upper;
    case DimensionKind::kInteger:
      return value >= lower && value <= upper && std::floor(value) == value;
    case DimensionKind::kCategorical:
      return value >= 0 && value < static_cast<double>(levels.size()) &&
             std::floor(value) == value;
  }
  return false;
}

std::optional<std::size_t> Dimension::cardinality() const {
  switch (kind) {
    case DimensionKind::kContinuous:
      return std::nullopt;
    case DimensionKind::kInteger:
      return static_cast<std::size_t>(upper - lower) + 1;
    case DimensionKind::kCategorical:
      return levels.size();
  }
  return std::nullopt;
}

std::size_t ConfigurationHash::operator()(std::span<const double> values) const {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (double v : values) {
    if (v == 0.0) v = 0.0;  // fold -0.0
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = mix64(h ^ bits);
  }
  return static_cast<std::size_t>(h);
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const {
  return (*this)(c.values());
}

SearchSpace::SearchSpace(std::vector<Dimension> dimensions) : dimensions_(std::move(dimensions)) {
  std::set<std::string> names;
  for (const auto& d : dimensions_) {
    if (d.kind == DimensionKind::kCategorical) {
      if (d.levels.empty()) {
        throw std::invalid_argument("categorical dimension '" + d.name + "' has no levels");
      }
      std::set<std::string> distinct(d.levels.begin(), d.levels.end());
      if (distinct.size() != d.levels.size()) {
        throw std::invalid_argument("categorical dimension '" + d.name + "' repeats a level");
      }
    } else {
      if (!std::isfinite(d.lower) || !std::isfinite(d.upper) || !(d.lower < d.upper)) {
        throw std::invalid_argument("dimension '" + d.name + "' needs lower < upper");
      }
      if (d.kind == DimensionKind::kInteger &&
          (std::floor(d.lower) != d.lower || std::floor(d.upper) != d.upper)) {
        throw std::invalid_argument("integer dimension '" + d.name + "' has fractional bounds");
      }
    }
    if (!d.name.empty() && !names.insert(d.name).second) {
      throw std::invalid_argument("duplicate dimension name '" + d.name + "'");
    }
    encoded_width_ += d.encoded_width();
  }
}

bool SearchSpace::contains(std::span<const double> values) const {
  if (values.size() != dimensions_.size()) return false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!dimensions_[i].contains(values[i])) return false;
  }
  return true;
}

void SearchSpace::encode_into(std::span<const double> values, double budget, double max_budget,
                              Eigen::Ref<Eigen::VectorXd> out) const {
  if (!(max_budget > 0.0) || !(budget > 0.0) || budget > max_budget * (1.0 + 1e-12)) {
    throw std::out_of_range("budget out of range (0, max_budget]");
  }
  if (values.size() != dimensions_.size()) {
    throw std::invalid_argument("configuration does not match the search space");
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < dimensions_.size(); ++i) {
    const Dimension& d = dimensions_[i];
    if (d.kind == DimensionKind::kCategorical) {
      const auto level = static_cast<std::size_t>(values[i]);
      for (std::size_t l = 0; l < d.levels.size(); ++l) out[k++] = (l == level) ? 1.0 : 0.0;
    } else {
      out[k++] = (values[i] - d.lower) / (d.upper - d.lower);
    }
  }
  out[k] = std::min(1.0, budget / max_budget);
}

Eigen::VectorXd SearchSpace::encode(const Configuration& config, double budget,
                                    double max_budget) const {
  Eigen::VectorXd out(encoded_width_ + 1);
  encode_into(config.values(), budget, max_budget, out);
  return out;
}

std::optional<std::size_t> SearchSpace::grid_size() const {
  std::size_t total = 1;
  for (const auto& d : dimensions_) {
    auto c = d.cardinality();
    if (!c) return std::nullopt;
    total *= *c;
  }
  return total;
}

std::vector<std::vector<double>> SearchSpace::enumerate_grid() const {
  if (!grid_size()) throw std::logic_error("cannot enumerate a space with continuous dimensions");
  std::vector<std::vector<double>> points{{}};
  for (const auto& d : dimensions_) {
    std::vector<std::vector<double>> next;
    const std::size_t card = *d.cardinality();
    next.reserve(points.size() * card);
    for (const auto& p : points) {
      for (std::size_t v = 0; v < card; ++v) {
        auto q = p;
        q.push_back(d.lower + static_cast<double>(v));
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

std::string SearchSpace::format(std::span<const double> values) const {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size() && i < dimensions_.size(); ++i) {
    if (i) os << ' ';
    const Dimension& d = dimensions_[i];
    os << (d.name.empty() ? "x" + std::to_string(i) : d.name) << '=';
    if (d.kind == DimensionKind::kCategorical) {
      os << d.levels.at(static_cast<std::size_t>(values[i]));
    } else {
      os << values[i];
    }
  }
  return os.str();
}

void to_json(nlohmann::json& j, const SearchSpace& space) {
  j = nlohmann::json::array();
  for (const auto& d : space.dimensions_) {
    nlohmann::json e;
    e["name"] = d.name;
    switch (d.kind) {
      case DimensionKind::kContinuous:
        e["kind"] = "continuous";
        e["lower"] = d.lower;
        e["upper"] = d.upper;
        break;
      case DimensionKind::kInteger:
        e["kind"] = "integer";
        e["lower"] = static_cast<std::int64_t>(d.lower);
        e["upper"] = static_cast<std::int64_t>(d.upper);
        break;
      case DimensionKind::kCategorical:
        e["kind"] = "categorical";
        e["levels"] = d.levels;
        break;
    }
    j.push_back(std::move(e));
  }
}

void from_json(const nlohmann::json& j, SearchSpace& space) {
  if (!j.is_array()) throw std::invalid_argument("search space must be a list of dimensions");
  std::vector<Dimension> dims;
  for (const auto& e : j) {
    const std::string name = e.value("name", "");
    const std::string kind = e.at("kind").get<std::string>();
    if (kind == "continuous") {
      dims.push_back(Dimension::continuous(name, e.at("lower").get<double>(),
                                           e.at("upper").get<double>()));
    } else if (kind == "integer") {
      dims.push_back(Dimension::integer(name, e.at("lower").get<std::int64_t>(),
                                        e.at("upper").get<std::int64_t>()));
    } else if (kind == "categorical") {
      dims.push_back(Dimension::categorical(name, e.at("levels").get<std::vector<std::string>>()));
    } else {
      throw std::invalid_argument("unknown dimension kind '" + kind + "'");
    }
  }
  space = SearchSpace(std::move(dims));
}

Configuration sample_uniform(const SearchSpace& space, Rng& rng, ConfigId id) {
  std::vector<double> values;
  values.reserve(space.size());
  for (const auto& d : space.dimensions()) {
    switch (d.kind) {
      case DimensionKind::kContinuous:
        values.push_back(rng.uniform(d.lower, d.upper));
        break;
      case DimensionKind::kInteger:
        values.push_back(static_cast<double>(rng.uniform_int(
            static_cast<std::int64_t>(d.lower), static_cast<std::int64_t>(d.upper))));
        break;
      case DimensionKind::kCategorical:
        values.push_back(static_cast<double>(rng.index(d.levels.size())));
        break;
    }
  }
  return Configuration(id, std::move(values));
}

}  // namespace hyperjump
