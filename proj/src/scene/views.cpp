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
#include "scene/views.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace dgf {

namespace {

void write_track(const AgentTrack& a, const Pose2& frame, double* out, std::vector<Pose2>* poses) {
  const auto steps = a.positions.size();
  Vec2 prev{};
  for (std::size_t t = 0; t < steps; ++t) {
    double* f = out + t * kAgentChannels;
    if (!a.valid[t]) {
      if (poses) poses->push_back({});
      continue;
    }
    const Vec2 p = frame.to_local(a.positions[t]);
    const bool prev_valid = t > 0 && a.valid[t - 1];
    f[0] = p.x;
    f[1] = p.y;
    f[2] = prev_valid ? p.x - prev.x : 0.0;
    f[3] = prev_valid ? p.y - prev.y : 0.0;
    f[4] = 1.0;
    prev = p;
    if (poses) poses->push_back({p, frame.heading_to_local(a.headings[t])});
  }
}

void write_lane(const LaneSegment& lane, const Pose2& frame, double* out) {
  std::array<Vec2, kLanePoints> local;
  for (int k = 0; k < kLanePoints; ++k) local[static_cast<std::size_t>(k)] = frame.to_local(lane.points[static_cast<std::size_t>(k)]);
  for (int k = 0; k < kLanePoints; ++k) {
    double* f = out + k * kLaneChannels;
    const auto ku = static_cast<std::size_t>(k);
    const Vec2 d = k == 0 ? local[1] - local[0] : local[ku] - local[ku - 1];
    f[0] = local[ku].x;
    f[1] = local[ku].y;
    f[2] = d.x;
    f[3] = d.y;
    f[4] = lane.type == LaneType::kStraight ? 1.0 : 0.0;
    f[5] = lane.type == LaneType::kLeft ? 1.0 : 0.0;
    f[6] = lane.type == LaneType::kRight ? 1.0 : 0.0;
    f[7] = lane.has_signal ? 1.0 : 0.0;
  }
}

std::int64_t steps_of(const Scenario& s) { return s.horizon.t_h + 1; }

}  // namespace

Pose2 lane_anchor(const LaneSegment& lane) {
  const Vec2 d = lane.points[1] - lane.points[0];
  return {lane.points[0], std::atan2(d.y, d.x)};
}

Pose2 agent_anchor(const AgentTrack& agent) {
  const int t = agent.last_valid();
  if (t < 0) throw InputError("agent has no valid observation");
  const auto tu = static_cast<std::size_t>(t);
  return {agent.positions[tu], agent.headings[tu]};
}

SceneCentricView build_scene_centric(const Scenario& s) {
  const auto& focal = s.agents.at(static_cast<std::size_t>(s.focal_index));
  if (!focal.valid_now()) throw InputError("focal agent is not observed at t = 0");
  SceneCentricView view;
  view.frame = {focal.positions.back(), focal.headings.back()};
  const auto n = static_cast<std::int64_t>(s.agents.size());
  const auto steps = steps_of(s);
  std::vector<double> x(static_cast<std::size_t>(n * steps * kAgentChannels), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& a = s.agents[static_cast<std::size_t>(i)];
    view.tracks.emplace_back();
    write_track(a, view.frame, x.data() + i * steps * kAgentChannels, &view.tracks.back());
    view.current_positions.push_back(view.frame.to_local(agent_anchor(a).position));
  }
  view.agents = Tensor::from({n, steps, kAgentChannels}, std::move(x));
  const auto nl = static_cast<std::int64_t>(s.lanes.size());
  std::vector<double> m(static_cast<std::size_t>(nl * kLanePoints * kLaneChannels), 0.0);
  for (std::int64_t l = 0; l < nl; ++l) {
    write_lane(s.lanes[static_cast<std::size_t>(l)], view.frame, m.data() + l * kLanePoints * kLaneChannels);
  }
  view.lanes = Tensor::from({nl, kLanePoints, kLaneChannels}, std::move(m));
  return view;
}

AgentCentricView build_agent_centric(const Scenario& s) {
  AgentCentricView view;
  const auto n = static_cast<std::int64_t>(s.agents.size());
  const auto steps = steps_of(s);
  std::vector<double> a(static_cast<std::size_t>(n * steps * kAgentChannels), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& agent = s.agents[static_cast<std::size_t>(i)];
    const Pose2 anchor = agent_anchor(agent);
    view.agent_anchors.push_back(anchor);
    view.is_target.push_back(agent.valid_now());
    write_track(agent, anchor, a.data() + i * steps * kAgentChannels, nullptr);
  }
  view.agents = Tensor::from({n, steps, kAgentChannels}, std::move(a));
  const auto nl = static_cast<std::int64_t>(s.lanes.size());
  std::vector<double> l(static_cast<std::size_t>(nl * kLanePoints * kLaneChannels), 0.0);
  for (std::int64_t j = 0; j < nl; ++j) {
    const auto& lane = s.lanes[static_cast<std::size_t>(j)];
    const Pose2 anchor = lane_anchor(lane);
    view.lane_anchors.push_back(anchor);
    write_lane(lane, anchor, l.data() + j * kLanePoints * kLaneChannels);
  }
  view.lanes = Tensor::from({nl, kLanePoints, kLaneChannels}, std::move(l));
  std::vector<Pose2> nodes = view.agent_anchors;
  nodes.insert(nodes.end(), view.lane_anchors.begin(), view.lane_anchors.end());
  view.rpe = compute_rpe(nodes);
  return view;
}

Tensor compute_rpe(const std::vector<Pose2>& anchors) {
  const auto n = static_cast<std::int64_t>(anchors.size());
  std::vector<double> out(static_cast<std::size_t>(n * n * kRpeChannels));
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      const Pose2& pi = anchors[static_cast<std::size_t>(i)];
      const Pose2& pj = anchors[static_cast<std::size_t>(j)];
      double* f = out.data() + (i * n + j) * kRpeChannels;
      const Vec2 d = pj.position - pi.position;
      const double alpha = pj.heading - pi.heading;
      const Vec2 local = rotate(d, -pi.heading);
      const double dist = d.norm();
      const double beta = dist == 0.0 ? 0.0 : std::atan2(local.y, local.x);
      f[0] = dist;
      f[1] = i == j ? 0.0 : std::sin(alpha);
      f[2] = i == j ? 1.0 : std::cos(alpha);
      f[3] = std::sin(beta);
      f[4] = std::cos(beta);
    }
  return Tensor::from({n, n, kRpeChannels}, std::move(out));
}

std::vector<LaneSegment> filter_lanes(const std::vector<LaneSegment>& lanes, const std::vector<AgentTrack>& agents,
                                      double radius_m) {
  if (!(radius_m > 0.0)) throw ContractError("filter_lanes: radius must be positive");
  std::vector<Vec2> observed;
  for (const auto& a : agents)
    for (std::size_t t = 0; t < a.positions.size(); ++t)
      if (a.valid[t]) observed.push_back(a.positions[t]);
  // Bounding box of observations grown by the radius rejects far lanes early.
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x, hi_x = -lo_x, hi_y = -lo_x;
  for (const auto& p : observed) {
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  }
  const double r2 = radius_m * radius_m;
  std::vector<LaneSegment> kept;
  for (const auto& lane : lanes) {
    bool keep = false;
    for (const auto& q : lane.points) {
      if (q.x < lo_x - radius_m || q.x > hi_x + radius_m || q.y < lo_y - radius_m || q.y > hi_y + radius_m) continue;
      for (const auto& p : observed) {
        const double dx = q.x - p.x, dy = q.y - p.y;
        if (dx * dx + dy * dy <= r2) {
          keep = true;
          break;
        }
      }
      if (keep) break;
    }
    if (keep) kept.push_back(lane);
  }
  if (kept.empty()) throw InputError("empty map: no lane within " + std::to_string(radius_m) + " m of any agent");
  return kept;
}

}  // namespace dgf
