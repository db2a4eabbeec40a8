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
#include <string>
#include <vector>

#include "scene/scenario.hpp"

namespace dgf {

enum class Behavior { kStraight, kLeft, kRight, kStop, kLaneChange };
inline constexpr int kBehaviorCount = 5;

const char* to_string(Behavior b);

struct SynthConfig {
  int n_scenarios = 32;
  int agents_min = 2;
  int agents_max = 3;
  /// Fractions for straight, left, right, stop, lane change; must sum to 1.
  std::array<double, kBehaviorCount> mix{0.3, 0.2, 0.2, 0.15, 0.15};
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  Horizon horizon;
  double speed_min = 5.0, speed_max = 12.0;
  int distractor_lanes = 1;
  /// Chance that a non-focal agent enters late or drops out before t = 0.
  double partial_track_prob = 0.15;
  double unobserved_now_prob = 0.1;
  /// Apply a random global rigid motion to every scenario.
  bool random_frame = true;

  /// Throws ContractError on an impossible configuration.
  void validate() const;
};

struct SynthScenario {
  Scenario scenario;
  std::vector<Behavior> behaviors;  // per agent
  /// Per agent: the upcoming maneuver is not yet visible at t = 0 and
  /// alternatives exist in the map.
  std::vector<bool> ambiguous;
};

std::vector<SynthScenario> generate_synthetic(const SynthConfig& cfg);

/// Writes <dir>/<id>.json per scenario and returns the paths in order.
std::vector<std::string> write_synthetic(const SynthConfig& cfg, const std::string& dir);

}  // namespace dgf
