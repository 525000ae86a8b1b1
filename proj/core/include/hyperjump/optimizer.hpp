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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hyperjump/bench.hpp"
#include "hyperjump/event_log.hpp"
#include "hyperjump/space.hpp"

namespace hyperjump {

using RequestId = std::uint64_t;

/// One evaluation handed to the executor.
struct EvalRequest {
  RequestId id = 0;
  int bracket = -1;  // -1 for optimizers without brackets
  int stage = -1;
  Configuration config;
  double budget = 0.0;
  std::optional<double> resume_from;
  std::vector<double> snapshot_rungs;
};

/// Best configuration observed at the maximum budget.
struct Incumbent {
  std::optional<Configuration> config;
  double accuracy = -std::numeric_limits<double>::infinity();
  double loss = 1.0;
};

/// Floor applied to incumbent losses.
inline constexpr double kMinIncumbentLoss = 1e-9;

/// Returns the incumbent after observing `accuracy` for `config` at `budget`:
/// only budget == max_budget is eligible and only strict improvements count.
/// `loss` is the benchmark's loss transform evaluated at `accuracy`.
Incumbent update_incumbent(const Incumbent& incumbent, const Configuration& config, double budget,
                           double accuracy, double loss, double max_budget);

/// Ask/tell optimizer driven by an executor. Ingestion, refits and jump
/// decisions happen inside ingest(); the executor never calls concurrently.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  virtual std::string name() const = 0;

  /// Next evaluation to start, or nullopt if nothing can start until a
  /// running evaluation completes.
  virtual std::optional<EvalRequest> propose() = 0;

  /// Completed evaluation. Returns ids of in-flight requests that must be
  /// cancelled as a consequence (jumps).
  virtual std::vector<RequestId> ingest(const EvalRequest& request,
                                        const EvaluationResult& result) = 0;

  /// The benchmark could not evaluate the request.
  virtual std::vector<RequestId> ingest_failure(const EvalRequest& request,
                                                const std::string& reason) = 0;

  virtual const Incumbent& incumbent() const = 0;

  /// Whether several evaluations may be in flight at once.
  virtual bool supports_parallel() const { return true; }

  void attach_log(EventLog* log) { log_ = log; }

 protected:
  void emit(const std::string& event, nlohmann::json fields = nlohmann::json::object()) const {
    if (log_ != nullptr) log_->emit(event, std::move(fields));
  }
  bool logging() const { return log_ != nullptr; }

 private:
  EventLog* log_ = nullptr;
};

}  // namespace hyperjump
