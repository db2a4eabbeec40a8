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
#include <gtest/gtest.h>

#include <cmath>

#include "core/error.hpp"
#include "harness/synth.hpp"
#include "scene/views.hpp"
#include "test_util.hpp"

namespace dgf {
namespace {

using testing::max_abs_diff;
using testing::straight_lane;
using testing::straight_track;

Scenario three_agents_four_lanes() {
  Scenario s;
  s.id = "hand";
  s.horizon = {5, 4, 10.0};
  s.agents.push_back(straight_track({0, 0}, 0.0, 8.0, s.horizon));
  s.agents.push_back(straight_track({5, 3}, 0.3, 6.0, s.horizon));
  s.agents.push_back(straight_track({-4, -2}, -1.0, 4.0, s.horizon));
  for (int i = 0; i < 4; ++i) s.lanes.push_back(straight_lane({-10.0 + 5 * i, -3.0 + i}, 0.1 * i));
  return s;
}

Se2 random_motion(Rng& rng) {
  return {rng.uniform(-M_PI, M_PI), {rng.uniform(-500, 500), rng.uniform(-500, 500)}};
}

TEST(SceneCentric, Shapes) {
  const auto s = three_agents_four_lanes();
  const auto v = build_scene_centric(s);
  EXPECT_EQ(v.agents.shape(), (Shape{3, 6, kAgentChannels}));
  EXPECT_EQ(v.lanes.shape(), (Shape{4, kLanePoints, kLaneChannels}));
}

TEST(SceneCentric, StationaryFocalNormalizesToOrigin) {
  Scenario s = three_agents_four_lanes();
  auto& focal = s.agents[0];
  for (std::size_t t = 0; t < focal.positions.size(); ++t) {
    focal.positions[t] = {5, 5};
    focal.headings[t] = M_PI / 2;
  }
  const auto v = build_scene_centric(s);
  for (const auto& pose : v.tracks[0]) {
    EXPECT_NEAR(pose.position.x, 0.0, 1e-12);
    EXPECT_NEAR(pose.position.y, 0.0, 1e-12);
    EXPECT_NEAR(pose.heading, 0.0, 1e-12);
  }
  for (int t = 0; t < 6; ++t) {
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(v.agents[t * kAgentChannels + c], 0.0, 1e-12);
  }
}

TEST(SceneCentric, UnobservedFocalIsRejected) {
  Scenario s = three_agents_four_lanes();
  s.agents[0].valid.back() = false;
  EXPECT_THROW(build_scene_centric(s), InputError);
}

TEST(AgentCentric, AnchorsSitAtOrigin) {
  const auto v = build_agent_centric(three_agents_four_lanes());
  const auto steps = v.agents.dim(1);
  for (std::int64_t i = 0; i < 3; ++i) {
    const auto last = (i * steps + steps - 1) * kAgentChannels;
    EXPECT_NEAR(v.agents[last], 0.0, 1e-12);
    EXPECT_NEAR(v.agents[last + 1], 0.0, 1e-12);
  }
  EXPECT_EQ(v.rpe.shape(), (Shape{7, 7, kRpeChannels}));
}

TEST(AgentCentric, TranslatedTwinHasIdenticalRows) {
  Scenario s = three_agents_four_lanes();
  AgentTrack twin = s.agents[1];
  for (auto& p : twin.positions) p = p + Vec2{10, 0};
  s.agents.push_back(twin);
  const auto v = build_agent_centric(s);
  const auto row = v.agents.dim(1) * kAgentChannels;
  for (std::int64_t k = 0; k < row; ++k) EXPECT_NEAR(v.agents[row + k], v.agents[3 * row + k], 1e-12);
}

TEST(Rpe, SelfPoseIsIdentity) {
  const auto v = build_agent_centric(three_agents_four_lanes());
  const auto n = v.rpe.dim(0);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto base = (i * n + i) * kRpeChannels;
    EXPECT_EQ(v.rpe[base + 0], 0.0);
    EXPECT_EQ(v.rpe[base + 1], 0.0);
    EXPECT_EQ(v.rpe[base + 2], 1.0);
    EXPECT_EQ(v.rpe[base + 3], 0.0);
    EXPECT_EQ(v.rpe[base + 4], 1.0);
  }
}

TEST(Rpe, WorkedExample) {
  const Tensor rpe = compute_rpe({{{0, 0}, 0.0}, {{3, 4}, M_PI / 2}});
  const double expected[] = {5, 1, 0, 0.8, 0.6};
  for (int c = 0; c < 5; ++c) EXPECT_NEAR(rpe[kRpeChannels + c], expected[c], 1e-9);
}

TEST(Rpe, SwapNegatesHeadingDifference) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Pose2 a{{rng.uniform(-20, 20), rng.uniform(-20, 20)}, rng.uniform(-3, 3)};
    const Pose2 b{{rng.uniform(-20, 20), rng.uniform(-20, 20)}, rng.uniform(-3, 3)};
    const Tensor rpe = compute_rpe({a, b});
    const auto ij = kRpeChannels, ji = 2 * kRpeChannels;
    EXPECT_NEAR(rpe[ij], rpe[ji], 1e-12);
    EXPECT_NEAR(rpe[ij + 1], -rpe[ji + 1], 1e-12);
    EXPECT_NEAR(rpe[ij + 2], rpe[ji + 2], 1e-12);
  }
}

TEST(Rpe, MatchesDirectTrigonometry) {
  Rng rng(2);
  std::vector<Pose2> poses;
  for (int i = 0; i < 6; ++i) poses.push_back({{rng.uniform(-30, 30), rng.uniform(-30, 30)}, rng.uniform(-4, 4)});
  const Tensor rpe = compute_rpe(poses);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    for (std::size_t j = 0; j < poses.size(); ++j) {
      if (i == j) continue;
      const double dx = poses[j].position.x - poses[i].position.x;
      const double dy = poses[j].position.y - poses[i].position.y;
      const double bearing = std::atan2(dy, dx) - poses[i].heading;
      const double alpha = poses[j].heading - poses[i].heading;
      const double expected[] = {std::hypot(dx, dy), std::sin(alpha), std::cos(alpha), std::sin(bearing),
                                 std::cos(bearing)};
      for (int c = 0; c < 5; ++c) {
        EXPECT_NEAR(rpe[static_cast<std::int64_t>((i * poses.size() + j) * kRpeChannels + c)], expected[c], 1e-9);
      }
    }
  }
}

TEST(Invariance, RigidMotionLeavesEveryViewUnchanged) {
  Rng rng(3);
  SynthConfig cfg;
  cfg.n_scenarios = 100;
  cfg.seed = 3;
  double worst = 0.0;
  for (const auto& item : generate_synthetic(cfg)) {
    const Scenario& s = item.scenario;
    const Scenario moved = transformed(s, random_motion(rng));
    const auto a = build_agent_centric(s), b = build_agent_centric(moved);
    const auto sa = build_scene_centric(s), sb = build_scene_centric(moved);
    for (double d : {max_abs_diff(a.agents, b.agents), max_abs_diff(a.lanes, b.lanes), max_abs_diff(a.rpe, b.rpe),
                     max_abs_diff(sa.agents, sb.agents), max_abs_diff(sa.lanes, sb.lanes)}) {
      worst = std::max(worst, d);
    }
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(FilterLanes, RadiusBoundary) {
  const Horizon h{3, 2, 10.0};
  std::vector<AgentTrack> agents{straight_track({0, 0}, 0.0, 0.0, h)};
  const LaneSegment far = straight_lane({0, 60}, 0.0);
  const LaneSegment touching = straight_lane({0, 0}, M_PI / 2);
  const auto kept = filter_lanes({far, touching}, agents, 50.0);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].points[0], touching.points[0]);
  EXPECT_THROW(filter_lanes({far}, agents, 50.0), InputError);
}

TEST(FilterLanes, MatchesBruteForceAndIsIdempotent) {
  Rng rng(4);
  const Horizon h{4, 2, 10.0};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<AgentTrack> agents;
    for (int i = 0; i < 3; ++i) {
      auto a = straight_track({rng.uniform(-40, 40), rng.uniform(-40, 40)}, rng.uniform(-3, 3), 5.0, h);
      a.valid[0] = rng.bernoulli(0.5);
      agents.push_back(a);
    }
    std::vector<LaneSegment> lanes;
    for (int l = 0; l < 30; ++l) lanes.push_back(straight_lane({rng.uniform(-150, 150), rng.uniform(-150, 150)},
                                                               rng.uniform(-3, 3)));
    std::vector<LaneSegment> expected;
    for (const auto& lane : lanes) {
      bool near = false;
      for (const auto& a : agents)
        for (std::size_t t = 0; t < a.positions.size(); ++t)
          for (const auto& q : lane.points)
            if (a.valid[t] && distance(q, a.positions[t]) <= 50.0) near = true;
      if (near) expected.push_back(lane);
    }
    if (expected.empty()) continue;
    const auto kept = filter_lanes(lanes, agents, 50.0);
    ASSERT_EQ(kept.size(), expected.size());
    for (std::size_t i = 0; i < kept.size(); ++i) EXPECT_EQ(kept[i].points[0], expected[i].points[0]);
    const auto again = filter_lanes(kept, agents, 50.0);
    EXPECT_EQ(again.size(), kept.size());
  }
}

TEST(LaneFeatures, OneHotTypeAndSignal) {
  Scenario s = three_agents_four_lanes();
  s.lanes[2].type = LaneType::kLeft;
  s.lanes[2].has_signal = true;
  const auto v = build_scene_centric(s);
  const auto base = 2 * kLanePoints * kLaneChannels;
  EXPECT_EQ(v.lanes[base + 4], 0.0);
  EXPECT_EQ(v.lanes[base + 5], 1.0);
  EXPECT_EQ(v.lanes[base + 6], 0.0);
  EXPECT_EQ(v.lanes[base + 7], 1.0);
}

}  // namespace
}  // namespace dgf
