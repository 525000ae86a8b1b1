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

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hyperjump {

/// In-memory run log, serialized as newline-delimited JSON. Every record
/// carries the simulated time `t` and an `event` name.
class EventLog {
 public:
  void set_time(double t) { now_ = t; }
  double now() const { return now_; }

  /// Appends {t, event, ...fields}. `fields` must be a JSON object.
  void emit(const std::string& event, nlohmann::json fields = nlohmann::json::object());

  const std::vector<nlohmann::json>& records() const { return records_; }
  std::size_t count(const std::string& event) const;

  void write_ndjson(std::ostream& out) const;
  std::string to_ndjson() const;

 private:
  double now_ = 0.0;
  std::vector<nlohmann::json> records_;
};

}  // namespace hyperjump
