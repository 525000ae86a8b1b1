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

#include "hyperjump/exec.hpp"

#include <charconv>
#include <chrono>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hyperjump {
namespace {

using SteadyClock = std::chrono::steady_clock;

double seconds_since(SteadyClock::time_point start) {
  return std::chrono::duration<double>(SteadyClock::now() - start).count();
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json describe(const EvalRequest& req) {
  nlohmann::json j = {{"request", req.id},
                      {"bracket", req.bracket},
                      {"stage", req.stage},
                      {"config", req.config.id()},
                      {"budget", req.budget}};
  if (req.resume_from) j["resume_from"] = *req.resume_from;
  return j;
}

struct Outcome {
  bool failed = false;
  std::string error;
  EvaluationResult result;
};

Outcome run_objective(const Benchmark& benchmark, const EvalRequest& req) {
  Outcome out;
  try {
    out.result = benchmark.evaluate(req.config, req.budget, req.resume_from, req.snapshot_rungs);
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
    out.result = {};
  }
  return out;
}

// Shared bookkeeping of both executors.
class Driver {
 public:
  Driver(Optimizer& optimizer, const StopCondition& stop, EventLog* log)
      : optimizer_(optimizer), stop_(stop), log_(log) {
    if (stop.empty()) throw std::invalid_argument("run needs at least one stop condition");
    optimizer_.attach_log(log);
    result_.trajectory.push_back({0.0, optimizer_.incumbent().loss, 0.0});
  }
  ~Driver() { optimizer_.attach_log(nullptr); }

  bool may_start(double now) const {
    if (stop_.time_limit && now >= *stop_.time_limit) return false;
    if (stop_.max_evals && result_.started >= *stop_.max_evals) return false;
    return !target_reached();
  }
  bool target_reached() const {
    return stop_.target_loss && optimizer_.incumbent().loss <= *stop_.target_loss;
  }

  std::optional<EvalRequest> propose(double now) {
    set_time(now);
    const auto t0 = SteadyClock::now();
    std::optional<EvalRequest> req = optimizer_.propose();
    result_.overhead_seconds += seconds_since(t0);
    if (req) {
      ++result_.recommendations;
      ++result_.started;
      if (log_) log_->emit("eval_start", describe(*req));
    }
    return req;
  }

  std::vector<RequestId> complete(double now, const EvalRequest& req, const Outcome& outcome) {
    set_time(now);
    if (log_) {
      nlohmann::json j = describe(req);
      j["cost"] = outcome.result.incremental_cost;
      if (outcome.failed) {
        j["failed"] = true;
        j["error"] = outcome.error;
      } else {
        j["accuracy"] = outcome.result.accuracy;
        if (!outcome.result.snapshots.empty()) {
          nlohmann::json snaps = nlohmann::json::array();
          for (const auto& s : outcome.result.snapshots) snaps.push_back({s.budget, s.accuracy});
          j["snapshots"] = std::move(snaps);
        }
      }
      log_->emit("eval_end", std::move(j));
    }
    result_.charged_cost += outcome.result.incremental_cost;
    ++result_.completed;
    if (outcome.failed) ++result_.failed;
    const double before = optimizer_.incumbent().loss;
    const auto t0 = SteadyClock::now();
    std::vector<RequestId> cancels = outcome.failed ? optimizer_.ingest_failure(req, outcome.error)
                                                    : optimizer_.ingest(req, outcome.result);
    result_.overhead_seconds += seconds_since(t0);
    const double after = optimizer_.incumbent().loss;
    if (after != before) result_.trajectory.push_back({now, after, result_.overhead_seconds});
    return cancels;
  }

  void cancelled(double now, const EvalRequest& req, double elapsed) {
    set_time(now);
    result_.charged_cost += elapsed;
    ++result_.cancelled;
    if (log_) {
      nlohmann::json j = describe(req);
      j["cost"] = elapsed;
      log_->emit("eval_cancelled", std::move(j));
    }
  }

  RunResult finish(double now) {
    result_.end_time = now;
    result_.trajectory.push_back({now, optimizer_.incumbent().loss, result_.overhead_seconds});
    return std::move(result_);
  }

  RunResult& result() { return result_; }

 private:
  void set_time(double now) {
    if (log_) log_->set_time(now);
  }

  Optimizer& optimizer_;
  const StopCondition& stop_;
  EventLog* log_;
  RunResult result_;
};

}  // namespace

void SimClock::advance_to(double t) {
  if (t < now_) throw std::logic_error("simulated time cannot go backwards");
  now_ = t;
}

std::optional<double> RunResult::time_to_loss(double target) const {
  for (const auto& p : trajectory) {
    if (p.incumbent_loss <= target) return p.sim_time;
  }
  return std::nullopt;
}

RunResult run_sequential(Optimizer& optimizer, const Benchmark& benchmark,
                         const StopCondition& stop, EventLog* log) {
  Driver driver(optimizer, stop, log);
  SimClock clock;
  while (driver.may_start(clock.now())) {
    std::optional<EvalRequest> req = driver.propose(clock.now());
    if (!req) throw std::logic_error(optimizer.name() + " proposed nothing with no evaluation running");
    driver.result().max_concurrency = 1;
    const Outcome outcome = run_objective(benchmark, *req);
    clock.advance_to(clock.now() + outcome.result.incremental_cost);
    const auto cancels = driver.complete(clock.now(), *req, outcome);
    if (!cancels.empty()) throw std::logic_error("cancellation requested with nothing in flight");
  }
  return driver.finish(clock.now());
}

RunResult run_parallel(Optimizer& optimizer, const Benchmark& benchmark, std::size_t workers,
                       const StopCondition& stop, EventLog* log) {
  if (workers == 0) throw std::invalid_argument("workers must be >= 1");
  if (workers > 1 && !optimizer.supports_parallel()) {
    throw std::invalid_argument(optimizer.name() + " only supports sequential execution");
  }
  struct Slot {
    EvalRequest request;
    Outcome outcome;
    double start = 0.0;
    double end = 0.0;
  };
  Driver driver(optimizer, stop, log);
  SimClock clock;
  std::vector<std::optional<Slot>> slots(workers);
  while (true) {
    bool can_start = true;
    for (std::size_t w = 0; w < workers && can_start; ++w) {
      if (slots[w]) continue;
      if (!driver.may_start(clock.now())) break;
      std::optional<EvalRequest> req = driver.propose(clock.now());
      if (!req) {
        can_start = false;
        break;
      }
      Slot s;
      s.outcome = run_objective(benchmark, *req);
      s.start = clock.now();
      s.end = clock.now() + s.outcome.result.incremental_cost;
      s.request = std::move(*req);
      slots[w] = std::move(s);
    }
    std::size_t busy = 0;
    std::optional<std::size_t> next;
    for (std::size_t w = 0; w < workers; ++w) {
      if (!slots[w]) continue;
      ++busy;
      if (!next || slots[w]->end < slots[*next]->end) next = w;
    }
    driver.result().max_concurrency = std::max(driver.result().max_concurrency, busy);
    if (!next) {
      if (can_start && driver.may_start(clock.now())) {
        throw std::logic_error(optimizer.name() + " proposed nothing with no evaluation running");
      }
      break;
    }
    Slot done = std::move(*slots[*next]);
    slots[*next].reset();
    clock.advance_to(done.end);
    const auto cancels = driver.complete(clock.now(), done.request, done.outcome);
    for (RequestId id : cancels) {
      bool found = false;
      for (auto& s : slots) {
        if (s && s->request.id == id) {
          driver.cancelled(clock.now(), s->request, clock.now() - s->start);
          s.reset();
          found = true;
          break;
        }
      }
      if (!found) throw std::logic_error("cancelled request is not running");
    }
    if (driver.target_reached()) break;
  }
  return driver.finish(clock.now());
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryPoint> trajectory,
                          bool with_wall_clock) {
  out << "sim_time,incumbent_loss,wall_overhead_cumulative\n";
  for (const auto& p : trajectory) {
    out << format_number(p.sim_time) << ',' << format_number(p.incumbent_loss) << ','
        << format_number(with_wall_clock ? p.wall_overhead : 0.0) << '\n';
  }
}

std::vector<TrajectoryPoint> read_trajectory_csv(std::istream& in) {
  std::vector<TrajectoryPoint> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("sim_time", 0) == 0) continue;
    TrajectoryPoint p;
    double* fields[3] = {&p.sim_time, &p.incumbent_loss, &p.wall_overhead};
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    for (int f = 0; f < 3; ++f) {
      auto res = std::from_chars(cur, end, *fields[f]);
      if (res.ec != std::errc()) {
        throw std::runtime_error("trajectory line " + std::to_string(line_no) + " is malformed");
      }
      cur = res.ptr;
      if (f < 2) {
        if (cur == end || *cur != ',') {
          throw std::runtime_error("trajectory line " + std::to_string(line_no) + " is malformed");
        }
        ++cur;
      }
    }
    if (cur != end) {
      throw std::runtime_error("trajectory line " + std::to_string(line_no) + " is malformed");
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace hyperjump
