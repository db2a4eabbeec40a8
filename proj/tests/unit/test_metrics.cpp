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

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "eval/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace dgf {
namespace {

using testing::metric_oracle;
using testing::MetricOracle;
using testing::random_instance;

TEST(Metrics, MatchBruteForceOnRandomInstances) {
  Rng rng(71);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_instance(rng);
    const MetricReport r = compute_metrics(x.view(), x.gt);
    const MetricOracle o = metric_oracle(x);
    ASSERT_NEAR(r.min_ade_k6, o.ade6, 1e-9);
    ASSERT_NEAR(r.min_fde_k6, o.fde6, 1e-9);
    ASSERT_NEAR(r.p_min_fde_k6, o.pfde6, 1e-9);
    ASSERT_NEAR(r.miss_rate_k6, o.mr, 1e-9);
    ASSERT_NEAR(r.min_ade_k1, o.ade1, 1e-9);
    ASSERT_NEAR(r.min_fde_k1, o.fde1, 1e-9);
    ASSERT_LE(r.min_fde_k6, r.min_fde_k1);
    ASSERT_LE(r.min_fde_k6, r.p_min_fde_k6);
    ASSERT_GE(r.miss_rate_k6, 0.0);
    ASSERT_LE(r.miss_rate_k6, 1.0);
    ASSERT_EQ(r.per_agent_min_fde.size(), static_cast<std::size_t>(x.n));
  }
}

TEST(Metrics, ExactModeScoresZero) {
  const std::vector<double> gt{1, 1, 2, 2, 3, 3};
  std::vector<double> traj(gt);
  for (int i = 0; i < 6; ++i) traj.push_back(gt[static_cast<std::size_t>(i)] + 9);
  const std::vector<double> prob{0.5, 0.5};
  const auto r = compute_metrics({1, 2, 3, traj, prob}, gt);
  EXPECT_EQ(r.min_ade_k6, 0.0);
  EXPECT_EQ(r.min_fde_k6, 0.0);
  EXPECT_EQ(r.miss_rate_k6, 0.0);
}

TEST(Metrics, ConstantOffsetsExample) {
  const std::vector<double> gt{0, 0, 1, 0, 2, 0};
  std::vector<double> traj;
  for (double off : {1.0, 2.0})
    for (int s = 0; s < 3; ++s) {
      traj.push_back(s + off);
      traj.push_back(0);
    }
  const std::vector<double> prob{0.5, 0.5};
  const auto r = compute_metrics({1, 2, 3, traj, prob}, gt);
  EXPECT_NEAR(r.min_ade_k6, 1.0, 1e-12);
  EXPECT_NEAR(r.min_fde_k6, 1.0, 1e-12);
}

TEST(Metrics, ProbabilityPenaltyExample) {
  const std::vector<double> gt{0, 0};
  std::vector<double> traj{1, 0};
  for (int m = 1; m < 6; ++m) {
    traj.push_back(10.0 + m);
    traj.push_back(0);
  }
  const std::vector<double> prob(6, 1.0 / 6.0);
  const auto r = compute_metrics({1, 6, 1, traj, prob}, gt);
  EXPECT_NEAR(r.min_fde_k6, 1.0, 1e-12);
  EXPECT_NEAR(r.p_min_fde_k6, 2.7918, 1e-4);
  const std::vector<double> sure{0.99, 0.002, 0.002, 0.002, 0.002, 0.002};
  EXPECT_NEAR(compute_metrics({1, 6, 1, traj, sure}, gt).p_min_fde_k6, 1.0 - std::log(0.99), 1e-12);
}

TEST(Metrics, Errors) {
  const std::vector<double> gt{0, 0};
  const std::vector<double> traj{1, 0, 2, 0};
  EXPECT_THROW(compute_metrics({1, 2, 1, traj, {}}, gt), ContractError);
  EXPECT_THROW(compute_metrics({1, 2, 2, traj, std::vector<double>{0.5, 0.5}}, gt), DimensionError);
}

TEST(DrivableArea, PointInPolygon) {
  const Polygon square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_TRUE(point_in_polygon({1, 1}, square));
  EXPECT_FALSE(point_in_polygon({3, 1}, square));
  EXPECT_FALSE(point_in_polygon({1, -0.1}, square));
}

TEST(DrivableArea, ComplianceCountsWholeTrajectories) {
  const std::vector<Polygon> area{{{0, 0}, {10, 0}, {10, 2}, {0, 2}}};
  const std::vector<double> gt{1, 1, 2, 1, 3, 1};
  const std::vector<double> traj{1, 1, 2, 1, 3, 1,     // inside
                                 1, 1, 2, 3, 3, 1};    // leaves at the middle sample
  const std::vector<double> prob{0.5, 0.5};
  const auto r = compute_metrics({1, 2, 3, traj, prob}, gt, &area);
  ASSERT_TRUE(r.dac);
  EXPECT_EQ(*r.dac, 0.5);
  EXPECT_FALSE(compute_metrics({1, 2, 3, traj, prob}, gt).dac);
}

TEST(DrivableArea, LaneBufferContainsTheCentreline) {
  LaneSegment lane = testing::straight_lane({0, 0}, 0.4);
  const auto area = lane_drivable_area({lane}, 2.5);
  EXPECT_EQ(area.size(), static_cast<std::size_t>(kLanePoints - 1));
  for (const auto& p : lane.points) EXPECT_TRUE(inside_area(p, area));
  const Vec2 normal{-std::sin(0.4), std::cos(0.4)};
  EXPECT_TRUE(inside_area(lane.points[3] + 2.4 * normal, area));
  EXPECT_FALSE(inside_area(lane.points[3] + 2.6 * normal, area));
  EXPECT_THROW(lane_drivable_area({lane}, 0.0), ContractError);
}

TEST(Hardest, Examples) {
  const std::vector<double> fractions{0.01, 0.02, 0.03, 0.04, 0.05};
  for (double v : slice_hardest(std::vector<double>(37, 2.5), fractions)) EXPECT_EQ(v, 2.5);
  std::vector<double> errs(100, 1.0);
  errs[17] = 10.0;
  const auto s = slice_hardest(errs, fractions);
  EXPECT_EQ(s[0], 10.0);
  EXPECT_EQ(s[1], 5.5);
  EXPECT_THROW(slice_hardest({}, fractions), ContractError);
  EXPECT_THROW(slice_hardest(errs, std::vector<double>{1.5}), ContractError);
}

TEST(Hardest, NonIncreasingWithFraction) {
  Rng rng(72);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> errs;
    for (auto i = rng.integer(1, 300); i > 0; --i) errs.push_back(rng.uniform(0, 20));
    const auto s = slice_hardest(errs, std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.05, 0.5, 1.0});
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(s[i], s[i - 1] + 1e-12);
  }
}

TEST(Combine, WeightsByAgentCount) {
  MetricReport a, b;
  a.n_agents = 1;
  a.min_fde_k6 = 4.0;
  a.dac = 1.0;
  b.n_agents = 3;
  b.min_fde_k6 = 0.0;
  const std::vector<MetricReport> both{a, b};
  const auto c = combine_reports(both);
  EXPECT_EQ(c.n_agents, 4);
  EXPECT_EQ(c.min_fde_k6, 1.0);
  EXPECT_EQ(*c.dac, 1.0);
}

}  // namespace
}  // namespace dgf
