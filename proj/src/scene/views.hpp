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

#include <vector>

#include "core/tensor.hpp"
#include "scene/geometry.hpp"
#include "scene/scenario.hpp"

namespace dgf {

/// Per-step agent features: x, y, dx, dy, valid. Invalid steps are all zero;
/// dx, dy are zero unless the previous step is valid too.
inline constexpr int kAgentChannels = 5;
/// Per-point lane features: x, y, dx, dy, one-hot {straight, left, right},
/// has_signal. dx, dy of point 0 is the forward difference p1 - p0.
inline constexpr int kLaneChannels = 8;
/// RPE entry: |d|, sin(alpha), cos(alpha), sin(beta), cos(beta).
inline constexpr int kRpeChannels = 5;
inline constexpr double kLaneRadius = 50.0;

/// Everything in the frame of the focal agent's pose at t = 0.
struct SceneCentricView {
  Tensor agents;  // X: [N, t_h + 1, kAgentChannels]
  Tensor lanes;   // M: [N_lane, 10, kLaneChannels]
  Pose2 frame;    // focal pose at t = 0 in world coordinates
  std::vector<std::vector<Pose2>> tracks;  // transformed poses per agent and step
  std::vector<Vec2> current_positions;     // per agent, anchor position in the focal frame
};

/// Every agent and lane in its own frame, plus relative poses between all nodes.
/// Nodes are ordered agents first, then lanes.
struct AgentCentricView {
  Tensor agents;  // A: [N, t_h + 1, kAgentChannels]
  Tensor lanes;   // L: [N_lane, 10, kLaneChannels]
  Tensor rpe;     // [N + N_lane, N + N_lane, kRpeChannels]
  std::vector<Pose2> agent_anchors;
  std::vector<Pose2> lane_anchors;
  /// Agents valid at t = 0. The rest are anchored at their last valid pose and
  /// serve only as context.
  std::vector<bool> is_target;
};

/// Requires the focal agent to be valid at t = 0.
SceneCentricView build_scene_centric(const Scenario& s);
AgentCentricView build_agent_centric(const Scenario& s);

/// Relative pose between all anchor pairs: alpha = heading_j - heading_i,
/// beta = bearing of p_j - p_i in frame i (0 for coincident points).
Tensor compute_rpe(const std::vector<Pose2>& anchors);

/// Lanes with some point within radius_m of some valid observed agent position.
/// Throws InputError when nothing survives.
std::vector<LaneSegment> filter_lanes(const std::vector<LaneSegment>& lanes, const std::vector<AgentTrack>& agents,
                                      double radius_m = kLaneRadius);

/// Anchor pose of a lane: first point, heading of its first segment.
Pose2 lane_anchor(const LaneSegment& lane);
/// Anchor pose of an agent: last valid observed pose (t = 0 for targets).
Pose2 agent_anchor(const AgentTrack& agent);

}  // namespace dgf
