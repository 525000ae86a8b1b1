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

#include "hyperjump/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hyperjump/rng.hpp"

namespace hyperjump {

EvaluationResult Benchmark::evaluate(const Configuration& config, double budget,
                                     std::optional<double> resume_from,
                                     std::span<const double> snapshot_rungs) const {
  const double r = max_budget();
  if (!(budget > 0.0) || budget > r) {
    throw std::out_of_range("budget " + std::to_string(budget) + " outside (0, R]");
  }
  if (resume_from && !(*resume_from >= 0.0 && *resume_from < budget)) {
    throw std::invalid_argument("resume_from must lie in [0, budget)");
  }
  EvaluationResult out;
  out.accuracy = accuracy(config, budget);
  const double total = cumulative_cost(config, budget);
  const double done = resume_from && *resume_from > 0.0 ? cumulative_cost(config, *resume_from) : 0.0;
  out.incremental_cost = std::max(0.0, total - done);
  const double lower = resume_from.value_or(0.0);
  std::vector<double> rungs(snapshot_rungs.begin(), snapshot_rungs.end());
  std::sort(rungs.begin(), rungs.end());
  rungs.erase(std::unique(rungs.begin(), rungs.end()), rungs.end());
  const auto declared = declared_rungs();
  for (double b : rungs) {
    if (declared && !std::binary_search(declared->begin(), declared->end(), b)) continue;
    if (b > lower && b < budget) out.snapshots.push_back({b, accuracy(config, b)});
  }
  return out;
}

SyntheticBenchmark::SyntheticBenchmark(Definition def) : def_(std::move(def)) {
  if (!def_.peak || !def_.rate || !def_.cost) {
    throw std::invalid_argument("synthetic benchmark needs peak, rate and cost functions");
  }
  if (!(def_.max_budget > 0.0)) throw std::invalid_argument("max_budget must be positive");
  if (!(def_.noise_stddev >= 0.0)) throw std::invalid_argument("noise_stddev must be >= 0");
}

double SyntheticBenchmark::expected_accuracy(std::span<const double> values, double budget) const {
  const double scaled = budget / def_.max_budget;
  return def_.peak(values) * (1.0 - std::exp(-def_.rate(values) * scaled));
}

double SyntheticBenchmark::accuracy(const Configuration& config, double budget) const {
  if (!def_.space.contains(config.values())) {
    throw UnknownConfigurationError("configuration outside the benchmark space");
  }
  double acc = expected_accuracy(config.values(), budget);
  if (def_.noise_stddev > 0.0) {
    const std::uint64_t key = mix64(def_.noise_seed) ^ mix64(ConfigurationHash{}(config.values())) ^
                              mix64(std::hash<double>{}(budget) + 0x632be59bd9b4e019ULL);
    acc += def_.noise_stddev * counter_normal(key);
  }
  return std::clamp(acc, 0.0, 1.0);
}

double SyntheticBenchmark::cumulative_cost(const Configuration& config, double budget) const {
  return def_.cost(config.values(), budget);
}

// ---------------------------------------------------------------------------
// Tabular

TabularBenchmark::TabularBenchmark(std::string name, SearchSpace space, std::vector<Row> rows)
    : name_(std::move(name)), space_(std::move(space)) {
  if (rows.empty()) throw std::invalid_argument("empty table");
  std::set<double> rung_set;
  std::map<ConfigId, std::vector<double>> by_id;
  for (const auto& row : rows) {
    if (row.values.size() != space_.size() || !space_.contains(row.values)) {
      throw std::invalid_argument("configuration " + std::to_string(row.config_id) +
                                  " is outside the search space");
    }
    if (!(row.budget > 0.0)) {
      throw std::invalid_argument("non-positive budget for configuration " +
                                  std::to_string(row.config_id));
    }
    auto [it, inserted] = by_id.emplace(row.config_id, row.values);
    if (!inserted && it->second != row.values) {
      throw std::invalid_argument("configuration id " + std::to_string(row.config_id) +
                                  " maps to different values");
    }
    rung_set.insert(row.budget);
  }
  rungs_.assign(rung_set.begin(), rung_set.end());
  for (const auto& [id, values] : by_id) {
    const std::size_t h = ConfigurationHash{}(values);
    for (std::size_t other : by_hash_[h]) {
      if (configs_[other].values().size() == values.size() &&
          std::equal(values.begin(), values.end(), configs_[other].values().begin())) {
        throw std::invalid_argument("duplicate key: configurations " +
                                    std::to_string(configs_[other].id()) + " and " +
                                    std::to_string(id) + " share values");
      }
    }
    by_hash_[h].push_back(configs_.size());
    configs_.emplace_back(id, values);
  }
  std::vector<std::vector<char>> seen(configs_.size(), std::vector<char>(rungs_.size(), 0));
  table_.assign(configs_.size(), std::vector<TabularEntry>(rungs_.size()));
  for (const auto& row : rows) {
    const std::size_t c = config_index(Configuration(row.config_id, row.values));
    const std::size_t r = rung_index(row.budget);
    if (seen[c][r]) {
      throw std::invalid_argument("duplicate key: configuration " + std::to_string(row.config_id) +
                                  " at budget " + std::to_string(row.budget));
    }
    seen[c][r] = 1;
    table_[c][r] = row.entry;
  }
  for (std::size_t c = 0; c < configs_.size(); ++c) {
    for (std::size_t r = 0; r < rungs_.size(); ++r) {
      if (!seen[c][r]) {
        throw std::invalid_argument("sparse table: configuration " +
                                    std::to_string(configs_[c].id()) + " has no row at budget " +
                                    std::to_string(rungs_[r]));
      }
    }
  }
}

std::size_t TabularBenchmark::config_index(const Configuration& config) const {
  auto it = by_hash_.find(ConfigurationHash{}(config.values()));
  if (it != by_hash_.end()) {
    for (std::size_t i : it->second) {
      if (configs_[i] == config) return i;
    }
  }
  throw UnknownConfigurationError("unknown configuration " + space_.format(config.values()));
}

std::size_t TabularBenchmark::rung_index(double budget) const {
  auto it = std::lower_bound(rungs_.begin(), rungs_.end(), budget);
  if (it == rungs_.end() || *it != budget) {
    throw std::out_of_range("budget " + std::to_string(budget) + " is not a declared rung");
  }
  return static_cast<std::size_t>(it - rungs_.begin());
}

const TabularEntry& TabularBenchmark::lookup(const Configuration& config, double budget) const {
  return table_[config_index(config)][rung_index(budget)];
}

double TabularBenchmark::accuracy(const Configuration& config, double budget) const {
  return lookup(config, budget).accuracy;
}

double TabularBenchmark::cumulative_cost(const Configuration& config, double budget) const {
  return lookup(config, budget).cumulative_cost;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_number(std::string_view token, double& out) {
  if (token.empty()) return false;
  const char* begin = token.data();
  if (*begin == '+') ++begin;
  auto res = std::from_chars(begin, token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size() && std::isfinite(out);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& t : out) {
    const auto b = t.find_first_not_of(" \t");
    const auto e = t.find_last_not_of(" \t");
    t = b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
  }
  return out;
}

std::string format_value(const Dimension& dim, double v) {
  if (dim.kind == DimensionKind::kCategorical) return dim.levels[static_cast<std::size_t>(v)];
  return format_number(v);
}

Dimension infer_dimension(const std::string& name, const std::vector<std::string>& tokens) {
  bool numeric = true;
  bool integral = true;
  std::vector<double> nums;
  for (const auto& t : tokens) {
    double v = 0.0;
    if (!parse_number(t, v)) {
      numeric = false;
      break;
    }
    nums.push_back(v);
    integral = integral && v == std::floor(v) && std::abs(v) < 9e15;
  }
  if (numeric && integral) {
    std::set<std::int64_t> distinct;
    for (double v : nums) distinct.insert(static_cast<std::int64_t>(v));
    const std::int64_t lo = *distinct.begin();
    const std::int64_t hi = *distinct.rbegin();
    if (hi > lo && static_cast<std::size_t>(hi - lo + 1) == distinct.size()) {
      return Dimension::integer(name, lo, hi);
    }
  }
  std::vector<std::string> levels;
  if (numeric) {
    std::map<double, std::string> ordered;
    for (std::size_t i = 0; i < tokens.size(); ++i) ordered.emplace(nums[i], tokens[i]);
    for (auto& [v, t] : ordered) levels.push_back(t);
  } else {
    std::set<std::string> ordered(tokens.begin(), tokens.end());
    levels.assign(ordered.begin(), ordered.end());
  }
  return Dimension::categorical(name, std::move(levels));
}

}  // namespace

void TabularBenchmark::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "config_id";
  for (const auto& dim : space_.dimensions()) out << ',' << dim.name;
  out << ",budget,accuracy,cumulative_cost\n";
  for (std::size_t c = 0; c < configs_.size(); ++c) {
    for (std::size_t r = 0; r < rungs_.size(); ++r) {
      out << configs_[c].id();
      for (std::size_t d = 0; d < space_.size(); ++d) {
        out << ',' << format_value(space_[d], configs_[c][d]);
      }
      out << ',' << format_number(rungs_[r]) << ',' << format_number(table_[c][r].accuracy) << ','
          << format_number(table_[c][r].cumulative_cost) << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

TabularBenchmark load_tabular(const std::filesystem::path& path,
                              const std::optional<SearchSpace>& space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    header = split_csv(line);
    break;
  }
  if (header.size() < 4 || header.front() != "config_id" ||
      header[header.size() - 3] != "budget" || header[header.size() - 2] != "accuracy" ||
      header.back() != "cumulative_cost") {
    throw TabularParseError(
        "header must be config_id,<dimensions...>,budget,accuracy,cumulative_cost", line_no);
  }
  const std::vector<std::string> dim_names(header.begin() + 1, header.end() - 3);
  if (space) {
    if (space->size() != dim_names.size()) {
      throw TabularParseError("header has " + std::to_string(dim_names.size()) +
                                  " dimension columns, space has " + std::to_string(space->size()),
                              line_no);
    }
    for (std::size_t d = 0; d < dim_names.size(); ++d) {
      if ((*space)[d].name != dim_names[d]) {
        throw TabularParseError("column '" + dim_names[d] + "' does not match dimension '" +
                                    (*space)[d].name + "'",
                                line_no);
      }
    }
  }

  struct RawRow {
    std::size_t line;
    ConfigId id;
    std::vector<std::string> dims;
    double budget, accuracy, cost;
  };
  std::vector<RawRow> raw;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tokens = split_csv(line);
    if (tokens.size() != header.size()) {
      throw TabularParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                  std::to_string(tokens.size()),
                              line_no);
    }
    RawRow row{line_no, 0, {}, 0.0, 0.0, 0.0};
    const auto& id_tok = tokens.front();
    auto res = std::from_chars(id_tok.data(), id_tok.data() + id_tok.size(), row.id);
    if (id_tok.empty() || res.ec != std::errc() || res.ptr != id_tok.data() + id_tok.size()) {
      throw TabularParseError("malformed config_id '" + id_tok + "'", line_no);
    }
    row.dims.assign(tokens.begin() + 1, tokens.end() - 3);
    const std::size_t n = tokens.size();
    if (!parse_number(tokens[n - 3], row.budget)) {
      throw TabularParseError("malformed budget '" + tokens[n - 3] + "'", line_no);
    }
    if (!parse_number(tokens[n - 2], row.accuracy)) {
      throw TabularParseError("malformed accuracy '" + tokens[n - 2] + "'", line_no);
    }
    if (!parse_number(tokens[n - 1], row.cost) || row.cost < 0.0) {
      throw TabularParseError("malformed cumulative_cost '" + tokens[n - 1] + "'", line_no);
    }
    raw.push_back(std::move(row));
  }
  if (raw.empty()) throw TabularParseError("table has no rows", line_no);

  SearchSpace resolved;
  if (space) {
    resolved = *space;
  } else {
    std::vector<Dimension> dims;
    for (std::size_t d = 0; d < dim_names.size(); ++d) {
      std::vector<std::string> column;
      column.reserve(raw.size());
      for (const auto& r : raw) column.push_back(r.dims[d]);
      dims.push_back(infer_dimension(dim_names[d], column));
    }
    resolved = SearchSpace(std::move(dims));
  }

  std::vector<TabularBenchmark::Row> rows;
  rows.reserve(raw.size());
  for (const auto& r : raw) {
    TabularBenchmark::Row row;
    row.config_id = r.id;
    row.budget = r.budget;
    row.entry = {r.accuracy, r.cost};
    for (std::size_t d = 0; d < resolved.size(); ++d) {
      const Dimension& dim = resolved[d];
      const std::string& tok = r.dims[d];
      if (dim.kind == DimensionKind::kCategorical) {
        auto it = std::find(dim.levels.begin(), dim.levels.end(), tok);
        if (it == dim.levels.end()) {
          throw TabularParseError("unknown level '" + tok + "' for '" + dim.name + "'", r.line);
        }
        row.values.push_back(static_cast<double>(it - dim.levels.begin()));
      } else {
        double v = 0.0;
        if (!parse_number(tok, v) || !dim.contains(v)) {
          throw TabularParseError("invalid value '" + tok + "' for '" + dim.name + "'", r.line);
        }
        row.values.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  return TabularBenchmark(path.stem().string(), std::move(resolved), std::move(rows));
}

// ---------------------------------------------------------------------------
// Toy suite

std::vector<std::string> toy_suite() { return {"quad-exp", "deceptive", "plateau"}; }

namespace {

double squared_distance(std::span<const double> u, std::span<const double> center) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - center[i]) * (u[i] - center[i]);
  return s;
}

}  // namespace

std::unique_ptr<SyntheticBenchmark> make_toy_benchmark(const std::string& name, double max_budget,
                                                       double noise_stddev,
                                                       std::uint64_t noise_seed) {
  SyntheticBenchmark::Definition def;
  def.name = name;
  def.max_budget = max_budget;
  def.noise_stddev = noise_stddev;
  def.noise_seed = noise_seed;
  def.cost = [](std::span<const double>, double b) { return b; };

  if (name == "quad-exp") {
    // 15 x 15 grid, bowl centered on grid point (10, 4).
    constexpr double kSide = 14.0;
    def.space = SearchSpace({Dimension::integer("x", 0, 14), Dimension::integer("y", 0, 14)});
    def.peak = [](std::span<const double> v) {
      const double u[2] = {v[0] / kSide, v[1] / kSide};
      const double c[2] = {10.0 / kSide, 4.0 / kSide};
      return 0.95 - 0.5 * squared_distance(u, c);
    };
    def.rate = [](std::span<const double> v) { return 8.0 + 4.0 * v[1] / kSide; };
  } else if (name == "deceptive") {
    // 5 x 5 grid; the best plateau belongs to the slowest learner at (3, 1).
    // Rung-1 rankings are inverted, rungs from R/9 up agree with R.
    constexpr double kSide = 4.0;
    def.space = SearchSpace({Dimension::integer("x", 0, 4), Dimension::integer("y", 0, 4)});
    const auto quality = [](std::span<const double> v) {
      const double u[2] = {v[0] / kSide, v[1] / kSide};
      const double c[2] = {3.0 / kSide, 1.0 / kSide};
      return std::max(0.0, 1.0 - std::sqrt(squared_distance(u, c)) / 1.2);
    };
    def.peak = [quality](std::span<const double> v) { return 0.5 + 0.45 * quality(v); };
    def.rate = [quality](std::span<const double> v) { return 20.0 + 60.0 * (1.0 - quality(v)); };
  } else if (name == "plateau") {
    // 15 x 15 grid with a flat optimal disc of radius 0.2 around (7, 7).
    constexpr double kSide = 14.0;
    def.space = SearchSpace({Dimension::integer("x", 0, 14), Dimension::integer("y", 0, 14)});
    def.peak = [](std::span<const double> v) {
      const double u[2] = {v[0] / kSide, v[1] / kSide};
      const double c[2] = {0.5, 0.5};
      const double excess = std::max(0.0, std::sqrt(squared_distance(u, c)) - 0.2);
      return 0.93 - 0.6 * excess * excess;
    };
    def.rate = [](std::span<const double> v) { return 6.0 + 2.0 * v[0] / kSide; };
  } else {
    throw std::invalid_argument("unknown toy benchmark '" + name + "'");
  }
  return std::make_unique<SyntheticBenchmark>(std::move(def));
}

GridOptimum grid_optimum(const Benchmark& benchmark) {
  if (!benchmark.space().grid_size()) {
    throw std::invalid_argument("grid optimum needs a fully discrete space");
  }
  GridOptimum best;
  best.accuracy = -std::numeric_limits<double>::infinity();
  for (auto& values : benchmark.space().enumerate_grid()) {
    const Configuration c(0, values);
    double acc = 0.0;
    try {
      acc = benchmark.accuracy(c, benchmark.max_budget());
    } catch (const UnknownConfigurationError&) {
      continue;
    }
    if (acc > best.accuracy) {
      best.accuracy = acc;
      best.values = std::move(values);
    }
  }
  return best;
}

}  // namespace hyperjump
