// Copyright 2026 The dgfnet Authors
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
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eval/metrics.hpp"

namespace dgf {

inline constexpr int kDumpVersion = 1;

/// Predictions for one scenario in the global frame, as written to disk.
struct PredictionDump {
  std::string scenario_id;
  std::vector<int> agent_ids;        // indices into the scenario's agents
  std::int64_t modes = 0, steps = 0;
  std::vector<double> trajectories;  // [agents, modes, steps, 2]
  std::vector<double> probabilities; // [agents, modes]
  std::vector<bool> kept;
  std::vector<double> spread;

  std::int64_t agents() const { return static_cast<std::int64_t>(agent_ids.size()); }
  ModeView view() const { return {agents(), modes, steps, trajectories, probabilities}; }
  /// Throws SchemaError naming the inconsistent field.
  void validate() const;
};

std::string serialize_dump(const PredictionDump& d);
PredictionDump parse_dump(const std::string& text);
void save_dump(const std::string& path, const PredictionDump& d);
PredictionDump load_dump(const std::string& path);

}  // namespace dgf
