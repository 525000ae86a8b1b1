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

// hyperjump: run seeded experiments, aggregate their trajectories, and sweep
// one policy parameter. Flags override values read from --config.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperjump/experiment.hpp"

namespace {

using hyperjump::ExperimentSpec;

// Flag values are kept apart from the ExperimentSpec so that only flags the user gave
// override the experiment file.
struct SpecFlags {
  std::string config;
  std::string benchmark;
  std::string optimizer;
  double max_budget = 0.0;
  int eta = 0;
  double lambda = 0.0;
  double p_nj = 0.0;
  double p_u = 0.0;
  std::size_t workers = 0;
  std::vector<std::uint64_t> seeds;
  double time_limit = 0.0;
  std::size_t max_evals = 0;
  double target_loss = 0.0;
  double noise = 0.0;
  std::string out;
  bool no_jump = false, no_ord = false, no_opt = false, no_bw = false, wall_clock = false;

  std::vector<std::pair<std::string, CLI::Option*>> options;

  void attach(CLI::App& app) {
    const auto add = [&](const std::string& name, auto& target, const std::string& help) {
      options.emplace_back(name, app.add_option(name, target, help));
      return options.back().second;
    };
    app.add_option("--config", config, "experiment file (JSON); flags override its values")
        ->check(CLI::ExistingFile);
    add("--benchmark", benchmark, "synthetic:<name> or tabular:<path>");
    add("--optimizer", optimizer, "optimizer")
        ->check(CLI::IsMember(hyperjump::optimizer_names()));
    add("--max-budget", max_budget, "maximum budget R");
    add("--eta", eta, "reduction factor");
    add("--lambda", lambda, "jump risk threshold as a fraction (0.10 = 10%)");
    add("--p-nj", p_nj, "probability of running a bracket without jumps");
    add("--p-u", p_u, "fraction of uniformly sampled bracket configurations");
    add("--workers", workers, "simulated workers");
    add("--seeds", seeds, "N for seeds 1..N, or an explicit list a,b,c")->delimiter(',');
    add("--time-limit", time_limit, "stop after this much simulated time");
    add("--max-evals", max_evals, "stop after this many evaluations");
    add("--target-loss", target_loss, "stop once the incumbent loss reaches this value");
    add("--noise", noise, "observation noise of synthetic benchmarks");
    add("--out", out, "output directory");
    const auto flag = [&](const std::string& name, bool& target, const std::string& help) {
      options.emplace_back(name, app.add_flag(name, target, help));
    };
    flag("--no-jump", no_jump, "disable jumps");
    flag("--no-ord", no_ord, "disable risk-aware evaluation ordering");
    flag("--no-opt", no_opt, "disable pause-resume and opportunistic snapshots");
    flag("--no-bw", no_bw, "disable model-based bracket warm start");
    flag("--wall-clock", wall_clock, "record wall-clock overhead in trajectories");
  }

  bool given(const std::string& name) const {
    for (const auto& [n, opt] : options) {
      if (n == name) return opt->count() > 0;
    }
    return false;
  }

  ExperimentSpec resolve() const {
    ExperimentSpec s = config.empty() ? ExperimentSpec{} : ExperimentSpec::load(config);
    if (given("--benchmark")) s.benchmark = benchmark;
    if (given("--optimizer")) s.optimizer = optimizer;
    if (given("--max-budget")) s.max_budget = max_budget;
    if (given("--eta")) s.eta = eta;
    if (given("--lambda")) s.policy.lambda = lambda;
    if (given("--p-nj")) s.policy.p_nj = p_nj;
    if (given("--p-u")) s.policy.p_u = p_u;
    if (given("--workers")) s.workers = workers;
    if (given("--seeds")) s.seeds = seeds.size() == 1 ? hyperjump::seed_range(seeds[0]) : seeds;
    if (given("--time-limit")) s.time_limit = time_limit;
    if (given("--max-evals")) s.max_evals = max_evals;
    if (given("--target-loss")) s.target_loss = target_loss;
    if (given("--noise")) s.noise = noise;
    if (given("--out")) s.out_dir = out;
    if (given("--no-jump")) s.policy.no_jump = no_jump;
    if (given("--no-ord")) s.policy.no_ord = no_ord;
    if (given("--no-opt")) s.policy.no_opt = no_opt;
    if (given("--no-bw")) s.policy.no_bw = no_bw;
    if (given("--wall-clock")) s.record_wall_clock = wall_clock;
    s.validate();
    return s;
  }
};

void report(const hyperjump::ExperimentArtifacts& a, const std::filesystem::path& dir) {
  for (const auto& s : a.seeds) {
    std::printf("seed %llu: %zu evaluations, %zu cancelled, end time %g, final loss %.6g\n",
                static_cast<unsigned long long>(s.seed), s.result.completed, s.result.cancelled,
                s.result.end_time, s.result.trajectory.back().incumbent_loss);
  }
  std::printf("wrote %zu runs to %s\n", a.seeds.size(), dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated-clock hyper-parameter optimization experiments"};
  app.require_subcommand(1);

  SpecFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run every seed of an experiment");
  run_flags.attach(*run);

  CLI::App* agg = app.add_subcommand("aggregate", "summarize the trajectories of a run directory");
  std::string agg_dir;
  std::vector<double> targets;
  agg->add_option("dir", agg_dir, "directory holding trajectory_*.csv")->required();
  agg->add_option("--target", targets, "loss targets for time-to-target (repeatable)")
      ->delimiter(',');

  SpecFlags sweep_flags;
  CLI::App* sw = app.add_subcommand("sweep", "one experiment per value of a parameter");
  sweep_flags.attach(*sw);
  std::string parameter;
  std::vector<double> values;
  sw->add_option("--parameter", parameter, "lambda, p_nj, p_u, eta or workers")
      ->required()
      ->check(CLI::IsMember(hyperjump::sweep_parameters()));
  sw->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ExperimentSpec spec = run_flags.resolve();
      report(hyperjump::run_experiment(spec), spec.out_dir);
    } else if (*agg) {
      const auto table = hyperjump::aggregate(agg_dir, targets);
      hyperjump::write_aggregate(table, agg_dir);
      std::printf("%zu runs, %zu grid points\n", table.runs.size(), table.grid.size());
      std::printf("final mean loss %.6g (std %.6g, median %.6g)\n", table.mean.back(),
                  table.stddev.back(), table.median.back());
      for (const auto& t : table.targets) {
        std::size_t reached = 0;
        for (const auto& x : t.times) reached += x.has_value();
        if (t.median) {
          std::printf("target %g: median time %g (%zu/%zu reached)\n", t.target, *t.median,
                      reached, t.times.size());
        } else {
          std::printf("target %g: median unreached (%zu/%zu reached)\n", t.target, reached,
                      t.times.size());
        }
      }
    } else if (*sw) {
      const ExperimentSpec spec = sweep_flags.resolve();
      for (const auto& dir : hyperjump::sweep(spec, parameter, values)) {
        std::printf("wrote %s\n", dir.string().c_str());
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
