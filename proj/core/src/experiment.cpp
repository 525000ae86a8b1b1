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

#include "hyperjump/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hyperjump/baselines.hpp"

#ifndef HYPERJUMP_VERSION
#define HYPERJUMP_VERSION "unknown"
#endif

namespace hyperjump {
namespace {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument(field + ": " + what);
}

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string(key) + ": " + e.what());
  }
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::vector<std::string> optimizer_names() { return {"hyperjump", "hb", "sh", "rs", "bo-ei"}; }

std::vector<std::string> sweep_parameters() { return {"lambda", "p_nj", "p_u", "eta", "workers"}; }

std::vector<std::uint64_t> seed_range(std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = i + 1;
  return out;
}

void ExperimentSpec::validate() const {
  require(benchmark.rfind("synthetic:", 0) == 0 || benchmark.rfind("tabular:", 0) == 0,
          "benchmark", "expected synthetic:<name> or tabular:<path>");
  const auto names = optimizer_names();
  require(std::find(names.begin(), names.end(), optimizer) != names.end(), "optimizer",
          "unknown optimizer '" + optimizer + "'");
  require(std::isfinite(max_budget) && max_budget > 0.0, "max_budget", "must be positive");
  require(eta >= 2, "eta", "must be an integer >= 2");
  require(max_budget >= eta, "max_budget", "must be >= eta");
  require(std::isfinite(policy.lambda) && policy.lambda >= 0.0 && policy.lambda <= 1.0, "lambda",
          "must be a fraction in [0, 1] (10% is 0.10)");
  require(policy.p_nj >= 0.0 && policy.p_nj <= 1.0, "p_nj", "must be a fraction in [0, 1]");
  require(policy.p_u >= 0.0 && policy.p_u <= 1.0, "p_u", "must be a fraction in [0, 1]");
  require(workers >= 1, "workers", "must be >= 1");
  require(workers == 1 || optimizer != "bo-ei", "workers", "bo-ei runs sequentially only");
  require(!seeds.empty(), "seeds", "at least one seed is required");
  require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(), "seeds",
          "seeds must be distinct");
  require(time_limit || max_evals || target_loss, "stop",
          "set time_limit and/or max_evals");
  if (time_limit) require(std::isfinite(*time_limit) && *time_limit > 0.0, "time_limit", "must be positive");
  if (max_evals) require(*max_evals >= 1, "max_evals", "must be >= 1");
  require(std::isfinite(noise) && noise >= 0.0, "noise", "must be >= 0");
  require(!out_dir.empty(), "out_dir", "must not be empty");
  require(!space || benchmark.rfind("tabular:", 0) == 0, "space",
          "only tabular benchmarks take a declared search space");
}

StopCondition ExperimentSpec::stop() const { return {time_limit, max_evals, target_loss}; }

json ExperimentSpec::to_json() const {
  json j = {{"benchmark", benchmark},
            {"optimizer", optimizer},
            {"max_budget", max_budget},
            {"eta", eta},
            {"lambda", policy.lambda},
            {"p_nj", policy.p_nj},
            {"p_u", policy.p_u},
            {"no_jump", policy.no_jump},
            {"no_ord", policy.no_ord},
            {"no_opt", policy.no_opt},
            {"no_bw", policy.no_bw},
            {"workers", workers},
            {"seeds", seeds},
            {"noise", noise},
            {"out", out_dir},
            {"record_wall_clock", record_wall_clock}};
  j["time_limit"] = time_limit ? json(*time_limit) : json(nullptr);
  j["max_evals"] = max_evals ? json(*max_evals) : json(nullptr);
  j["target_loss"] = target_loss ? json(*target_loss) : json(nullptr);
  if (space) j["space"] = *space;
  return j;
}

ExperimentSpec ExperimentSpec::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment file must hold a JSON object");
  static const std::set<std::string> known = {
      "benchmark", "optimizer", "max_budget", "eta",   "lambda",     "p_nj",
      "p_u",       "no_jump",   "no_ord",     "no_opt", "no_bw",     "workers",
      "seeds",     "time_limit", "max_evals", "target_loss", "noise", "out",
      "record_wall_clock", "space"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument(key + ": unknown field");
  }
  ExperimentSpec s;
  if (j.contains("benchmark")) s.benchmark = get_field<std::string>(j, "benchmark");
  if (j.contains("optimizer")) s.optimizer = get_field<std::string>(j, "optimizer");
  if (j.contains("max_budget")) s.max_budget = get_field<double>(j, "max_budget");
  if (j.contains("eta")) s.eta = get_field<int>(j, "eta");
  if (j.contains("lambda")) s.policy.lambda = get_field<double>(j, "lambda");
  if (j.contains("p_nj")) s.policy.p_nj = get_field<double>(j, "p_nj");
  if (j.contains("p_u")) s.policy.p_u = get_field<double>(j, "p_u");
  if (j.contains("no_jump")) s.policy.no_jump = get_field<bool>(j, "no_jump");
  if (j.contains("no_ord")) s.policy.no_ord = get_field<bool>(j, "no_ord");
  if (j.contains("no_opt")) s.policy.no_opt = get_field<bool>(j, "no_opt");
  if (j.contains("no_bw")) s.policy.no_bw = get_field<bool>(j, "no_bw");
  if (j.contains("workers")) s.workers = get_field<std::size_t>(j, "workers");
  if (j.contains("seeds")) {
    const json& v = j.at("seeds");
    if (v.is_number_integer()) {
      if (v.get<long long>() < 1) throw std::invalid_argument("seeds: count must be >= 1");
      s.seeds = seed_range(v.get<std::size_t>());
    } else {
      s.seeds = get_field<std::vector<std::uint64_t>>(j, "seeds");
    }
  }
  if (j.contains("time_limit") && !j.at("time_limit").is_null()) {
    s.time_limit = get_field<double>(j, "time_limit");
  }
  if (j.contains("max_evals") && !j.at("max_evals").is_null()) {
    s.max_evals = get_field<std::size_t>(j, "max_evals");
  }
  if (j.contains("target_loss") && !j.at("target_loss").is_null()) {
    s.target_loss = get_field<double>(j, "target_loss");
  }
  if (j.contains("noise")) s.noise = get_field<double>(j, "noise");
  if (j.contains("out")) s.out_dir = get_field<std::string>(j, "out");
  if (j.contains("space") && !j.at("space").is_null()) {
    try {
      s.space = j.at("space").get<SearchSpace>();
    } catch (const std::exception& e) {
      throw std::invalid_argument(std::string("space: ") + e.what());
    }
  }
  if (j.contains("record_wall_clock")) {
    s.record_wall_clock = get_field<bool>(j, "record_wall_clock");
  }
  return s;
}

ExperimentSpec ExperimentSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::unique_ptr<Benchmark> make_benchmark(const ExperimentSpec& spec, std::uint64_t seed) {
  const std::string& sel = spec.benchmark;
  if (sel.rfind("synthetic:", 0) == 0) {
    return make_toy_benchmark(sel.substr(10), spec.max_budget, spec.noise, seed);
  }
  if (sel.rfind("tabular:", 0) == 0) {
    auto table = std::make_unique<TabularBenchmark>(load_tabular(sel.substr(8), spec.space));
    if (std::abs(table->max_budget() - spec.max_budget) > 1e-9 * spec.max_budget) {
      throw std::invalid_argument("max_budget: table's largest rung is " +
                                  format_number(table->max_budget()));
    }
    return table;
  }
  throw std::invalid_argument("benchmark: unknown selector '" + sel + "'");
}

std::unique_ptr<Optimizer> make_optimizer(const ExperimentSpec& spec, const Benchmark& benchmark,
                                          std::uint64_t seed) {
  if (spec.optimizer == "hyperjump") {
    HyperJumpOptions o;
    o.max_budget = spec.max_budget;
    o.eta = spec.eta;
    o.policy = spec.policy;
    o.seed = seed;
    return std::make_unique<HyperJump>(benchmark, o);
  }
  if (spec.optimizer == "hb") {
    return std::make_unique<HyperBand>(benchmark, spec.max_budget, spec.eta, seed);
  }
  if (spec.optimizer == "sh") {
    return std::make_unique<SuccessiveHalving>(benchmark, spec.max_budget, spec.eta, seed);
  }
  if (spec.optimizer == "rs") return std::make_unique<RandomSearch>(benchmark, seed);
  if (spec.optimizer == "bo-ei") {
    BoEiOptions o;
    o.seed = seed;
    return std::make_unique<BoEi>(benchmark, o);
  }
  throw std::invalid_argument("optimizer: unknown optimizer '" + spec.optimizer + "'");
}

RunResult run_once(const ExperimentSpec& spec, const Benchmark& benchmark, std::uint64_t seed,
                   EventLog* log) {
  auto optimizer = make_optimizer(spec, benchmark, seed);
  if (spec.workers == 1) return run_sequential(*optimizer, benchmark, spec.stop(), log);
  return run_parallel(*optimizer, benchmark, spec.workers, spec.stop(), log);
}

ExperimentArtifacts run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::filesystem::path dir(spec.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
  ExperimentArtifacts out;
  json runs = json::array();
  std::unique_ptr<Benchmark> shared;
  for (std::uint64_t seed : spec.seeds) {
    std::unique_ptr<Benchmark> per_seed;
    const Benchmark* bench = nullptr;
    if (spec.benchmark.rfind("tabular:", 0) == 0) {
      if (!shared) shared = make_benchmark(spec, seed);
      bench = shared.get();
    } else {
      per_seed = make_benchmark(spec, seed);
      bench = per_seed.get();
    }
    EventLog log;
    SeedArtifacts art;
    art.seed = seed;
    art.result = run_once(spec, *bench, seed, &log);
    art.log = dir / ("events_seed" + std::to_string(seed) + ".ndjson");
    art.trajectory = dir / ("trajectory_seed" + std::to_string(seed) + ".csv");
    write_file(art.log, log.to_ndjson());
    std::ostringstream traj;
    write_trajectory_csv(traj, art.result.trajectory, spec.record_wall_clock);
    write_file(art.trajectory, traj.str());
    runs.push_back({{"seed", seed},
                    {"log", art.log.filename().string()},
                    {"trajectory", art.trajectory.filename().string()},
                    {"evaluations", art.result.completed},
                    {"cancelled", art.result.cancelled},
                    {"end_time", art.result.end_time},
                    {"final_loss", art.result.trajectory.back().incumbent_loss}});
    if (spec.record_wall_clock) {
      runs.back()["overhead_seconds"] = art.result.overhead_seconds;
      runs.back()["mean_recommendation_seconds"] = art.result.mean_overhead();
    }
    out.seeds.push_back(std::move(art));
  }
  json manifest = {{"spec", spec.to_json()},
                   {"version", HYPERJUMP_VERSION},
                   {"benchmark_rungs", budget_rungs(spec.max_budget, spec.eta)},
                   {"runs", runs}};
  out.manifest = dir / "manifest.json";
  write_file(out.manifest, manifest.dump(2) + "\n");
  return out;
}

AggregateTable aggregate(std::span<const std::vector<TrajectoryPoint>> runs,
                         std::span<const double> targets) {
  if (runs.empty()) throw std::invalid_argument("aggregate needs at least one trajectory");
  AggregateTable t;
  std::set<double> grid;
  for (const auto& r : runs) {
    if (r.empty()) throw std::invalid_argument("empty trajectory");
    for (const auto& p : r) grid.insert(p.sim_time);
  }
  t.grid.assign(grid.begin(), grid.end());
  const std::size_t n = runs.size();
  std::vector<std::size_t> cursor(n, 0);
  std::vector<double> values(n);
  for (double g : t.grid) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = runs[i];
      while (cursor[i] + 1 < r.size() && r[cursor[i] + 1].sim_time <= g) ++cursor[i];
      // Before a run's first breakpoint its loss is the initial value.
      values[i] = r[cursor[i]].incumbent_loss;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    if (n > 1) {
      for (double v : values) var += (v - mean) * (v - mean);
      var /= static_cast<double>(n - 1);
    }
    t.mean.push_back(mean);
    t.stddev.push_back(std::sqrt(var));
    t.median.push_back(median_of(values));
  }
  for (double target : targets) {
    TargetSummary s;
    s.target = target;
    std::vector<double> keyed;
    for (const auto& r : runs) {
      std::optional<double> hit;
      for (const auto& p : r) {
        if (p.incumbent_loss <= target) {
          hit = p.sim_time;
          break;
        }
      }
      s.times.push_back(hit);
      keyed.push_back(hit.value_or(std::numeric_limits<double>::infinity()));
    }
    const double m = median_of(keyed);
    if (std::isfinite(m)) s.median = m;
    t.targets.push_back(std::move(s));
  }
  return t;
}

AggregateTable aggregate(const std::filesystem::path& dir, std::span<const double> targets) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::invalid_argument("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("trajectory", 0) == 0 && e.path().extension() == ".csv") {
      files.push_back(e.path());
    }
  }
  if (files.empty()) throw std::invalid_argument("no trajectory files in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<std::vector<TrajectoryPoint>> runs;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw std::runtime_error("cannot open " + f.string());
    runs.push_back(read_trajectory_csv(in));
  }
  AggregateTable t = aggregate(runs, targets);
  for (const auto& f : files) t.runs.push_back(f.filename().string());
  return t;
}

void write_aggregate(const AggregateTable& table, const std::filesystem::path& dir) {
  std::ostringstream summary;
  summary << "sim_time,mean_loss,std_loss,median_loss\n";
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    summary << format_number(table.grid[i]) << ',' << format_number(table.mean[i]) << ','
            << format_number(table.stddev[i]) << ',' << format_number(table.median[i]) << '\n';
  }
  write_file(dir / "summary.csv", summary.str());
  std::ostringstream ttt;
  ttt << "target,run,time\n";
  for (const auto& s : table.targets) {
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      const std::string run = i < table.runs.size() ? table.runs[i] : std::to_string(i);
      ttt << format_number(s.target) << ',' << run << ','
          << (s.times[i] ? format_number(*s.times[i]) : std::string("unreached")) << '\n';
    }
    ttt << format_number(s.target) << ",median,"
        << (s.median ? format_number(*s.median) : std::string("unreached")) << '\n';
  }
  write_file(dir / "time_to_target.csv", ttt.str());
}

std::vector<std::filesystem::path> sweep(const ExperimentSpec& spec, const std::string& parameter,
                                         std::span<const double> values) {
  const auto params = sweep_parameters();
  if (std::find(params.begin(), params.end(), parameter) == params.end()) {
    throw std::invalid_argument("unknown sweep parameter '" + parameter + "'");
  }
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (parameter == "workers" && spec.optimizer == "bo-ei") {
    throw std::invalid_argument("workers: cannot sweep workers for the sequential-only bo-ei");
  }
  std::vector<ExperimentSpec> specs;
  for (double v : values) {
    ExperimentSpec s = spec;
    const auto integral = [&](const char* what) {
      if (v != std::floor(v) || v < 0) {
        throw std::invalid_argument(std::string(what) + ": sweep values must be integers");
      }
      return static_cast<long long>(v);
    };
    if (parameter == "lambda") s.policy.lambda = v;
    if (parameter == "p_nj") s.policy.p_nj = v;
    if (parameter == "p_u") s.policy.p_u = v;
    if (parameter == "eta") s.eta = static_cast<int>(integral("eta"));
    if (parameter == "workers") s.workers = static_cast<std::size_t>(integral("workers"));
    s.out_dir = (std::filesystem::path(spec.out_dir) / (parameter + "=" + format_number(v))).string();
    s.validate();
    specs.push_back(std::move(s));
  }
  std::vector<std::filesystem::path> dirs;
  for (const auto& s : specs) {
    run_experiment(s);
    dirs.emplace_back(s.out_dir);
  }
  return dirs;
}

}  // namespace hyperjump
