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
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hyperjump/bench.hpp"
#include "hyperjump/event_log.hpp"
#include "hyperjump/optimizer.hpp"

namespace hyperjump {

/// Simulated time; only moves forward.
class SimClock {
 public:
  double now() const { return now_; }
  /// Throws std::logic_error when t < now().
  void advance_to(double t);

 private:
  double now_ = 0.0;
};

struct StopCondition {
  std::optional<double> time_limit;     // no evaluation starts at or after this time
  std::optional<std::size_t> max_evals;  // evaluations started
  std::optional<double> target_loss;    // stop once the incumbent loss is <= target

  bool empty() const { return !time_limit && !max_evals && !target_loss; }
};

struct TrajectoryPoint {
  double sim_time = 0.0;
  double incumbent_loss = 1.0;
  double wall_overhead = 0.0;  // cumulative optimizer seconds
};

struct RunResult {
  /// Breakpoints of the incumbent loss step function, starting at t = 0 and
  /// closed by a point at the end of the run.
  std::vector<TrajectoryPoint> trajectory;
  double end_time = 0.0;
  double charged_cost = 0.0;  // completed plus partial cancelled costs
  std::size_t started = 0;
  std::size_t completed = 0;
  std::size_t cancelled = 0;
  std::size_t failed = 0;
  std::size_t recommendations = 0;
  double overhead_seconds = 0.0;
  std::size_t max_concurrency = 0;

  double mean_overhead() const {
    return recommendations ? overhead_seconds / static_cast<double>(recommendations) : 0.0;
  }
  /// First simulated time at which the incumbent loss is <= target.
  std::optional<double> time_to_loss(double target) const;
};

/// One evaluation at a time; simulated time advances by each incremental cost.
RunResult run_sequential(Optimizer& optimizer, const Benchmark& benchmark,
                         const StopCondition& stop, EventLog* log = nullptr);

/// Discrete-event simulation of `workers` synchronous workers. Completions are
/// processed in (time, worker id) order; cancelled evaluations are charged the
/// elapsed time and free their worker at the cancellation instant.
RunResult run_parallel(Optimizer& optimizer, const Benchmark& benchmark, std::size_t workers,
                       const StopCondition& stop, EventLog* log = nullptr);

/// `sim_time,incumbent_loss,wall_overhead_cumulative` rows. The wall column is
/// written as 0 unless `with_wall_clock`, which keeps reruns byte-identical.
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryPoint> trajectory,
                          bool with_wall_clock = false);
std::vector<TrajectoryPoint> read_trajectory_csv(std::istream& in);

}  // namespace hyperjump
