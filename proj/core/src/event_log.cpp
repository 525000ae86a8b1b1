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

#include "hyperjump/event_log.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hyperjump {

void EventLog::emit(const std::string& event, nlohmann::json fields) {
  if (!fields.is_object()) throw std::invalid_argument("event fields must be an object");
  nlohmann::json record = nlohmann::json::object();
  record["t"] = now_;
  record["event"] = event;
  for (auto& [key, value] : fields.items()) record[key] = std::move(value);
  records_.push_back(std::move(record));
}

std::size_t EventLog::count(const std::string& event) const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.at("event") == event ? 1 : 0;
  return n;
}

void EventLog::write_ndjson(std::ostream& out) const {
  for (const auto& r : records_) out << r.dump() << '\n';
}

std::string EventLog::to_ndjson() const {
  std::ostringstream out;
  write_ndjson(out);
  return out.str();
}

}  // namespace hyperjump
