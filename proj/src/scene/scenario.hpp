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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scene/geometry.hpp"

namespace dgf {

inline constexpr int kLanePoints = 10;

enum class LaneType { kStraight, kLeft, kRight };

const char* to_string(LaneType t);
LaneType lane_type_from_string(const std::string& s);

struct Horizon {
  int t_h = 19;  // history steps before t = 0; tracks hold t_h + 1 poses
  int t_f = 30;
  double hz = 10.0;
};

struct AgentTrack {
  std::vector<Vec2> positions;   // t_h + 1 poses, timestamps -t_h..0
  std::vector<double> headings;  // radians
  std::vector<bool> valid;
  std::optional<std::vector<Vec2>> future_gt;  // t_f points, training/eval only

  bool valid_now() const { return !valid.empty() && valid.back(); }
  /// Index of the last valid step, or -1.
  int last_valid() const;
};

struct LaneSegment {
  std::array<Vec2, kLanePoints> points;
  LaneType type = LaneType::kStraight;
  bool has_signal = false;
};

using Polygon = std::vector<Vec2>;

struct Scenario {
  std::string id;
  Horizon horizon;
  int focal_index = 0;
  std::vector<AgentTrack> agents;
  std::vector<LaneSegment> lanes;
  std::optional<std::vector<Polygon>> drivable_area;

  /// Agents observed at t = 0; only these are prediction targets.
  std::vector<int> target_agents() const;
};

inline constexpr int kScenarioVersion = 1;

/// Checks shapes and finiteness; throws SchemaError naming the offending field.
void validate(const Scenario& s);

Scenario parse_scenario(const std::string& json_text, const std::string& fallback_id = "");
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);
void save_scenario(const std::string& path, const Scenario& s);

/// Applies a rigid motion to every coordinate and heading of a scenario.
Scenario transformed(const Scenario& s, const Se2& motion);

}  // namespace dgf
