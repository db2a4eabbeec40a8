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
#include <numeric>

#include "core/error.hpp"
#include "eval/ensemble.hpp"
#include "test_util.hpp"

namespace dgf {
namespace {

/// Dump whose K modes end far apart, with random probabilities.
PredictionDump spread_dump(Rng& rng, std::int64_t agents, std::int64_t modes, std::int64_t steps) {
  PredictionDump d;
  d.scenario_id = "s";
  d.modes = modes;
  d.steps = steps;
  for (std::int64_t i = 0; i < agents; ++i) {
    d.agent_ids.push_back(static_cast<int>(i));
    d.kept.push_back(i % 2 == 0);
    d.spread.push_back(1.0 + i);
    double total = 0.0;
    std::vector<double> w;
    for (std::int64_t m = 0; m < modes; ++m) {
      const double angle = 2 * M_PI * m / modes;
      for (std::int64_t s = 1; s <= steps; ++s) {
        d.trajectories.push_back(s * 10.0 * std::cos(angle) + rng.uniform(-0.5, 0.5));
        d.trajectories.push_back(s * 10.0 * std::sin(angle) + rng.uniform(-0.5, 0.5));
      }
      w.push_back(rng.uniform(0.1, 1.0));
      total += w.back();
    }
    for (double v : w) d.probabilities.push_back(v / total);
  }
  return d;
}

void expect_rows_normalized(const PredictionDump& d) {
  for (std::int64_t i = 0; i < d.agents(); ++i) {
    double s = 0.0;
    for (std::int64_t m = 0; m < d.modes; ++m) {
      EXPECT_GE(d.probabilities[static_cast<std::size_t>(i * d.modes + m)], 0.0);
      s += d.probabilities[static_cast<std::size_t>(i * d.modes + m)];
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Ensemble, SingleRunIsAFixedPoint) {
  Rng rng(81);
  const auto d = spread_dump(rng, 3, 6, 4);
  const auto out = ensemble_merge(std::vector<PredictionDump>{d});
  ASSERT_EQ(out.trajectories.size(), d.trajectories.size());
  for (std::size_t i = 0; i < d.trajectories.size(); ++i) EXPECT_NEAR(out.trajectories[i], d.trajectories[i], 1e-9);
  for (std::size_t i = 0; i < d.probabilities.size(); ++i) EXPECT_NEAR(out.probabilities[i], d.probabilities[i], 1e-9);
  EXPECT_EQ(out.kept, d.kept);
  EXPECT_EQ(out.spread, d.spread);
}

TEST(Ensemble, TwoIdenticalRunsReproduceTheInput) {
  Rng rng(82);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = spread_dump(rng, 2, 6, 5);
    const auto out = ensemble_merge(std::vector<PredictionDump>{d, d});
    ASSERT_EQ(out.modes, 6);
    for (std::size_t i = 0; i < d.trajectories.size(); ++i) ASSERT_NEAR(out.trajectories[i], d.trajectories[i], 1e-9);
    for (std::size_t i = 0; i < d.probabilities.size(); ++i) ASSERT_NEAR(out.probabilities[i], d.probabilities[i], 1e-9);
    expect_rows_normalized(out);
  }
}

TEST(Ensemble, ProbabilitiesAlwaysSumToOne) {
  Rng rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PredictionDump> runs;
    for (auto r = rng.integer(1, 5); r > 0; --r) runs.push_back(spread_dump(rng, 3, 6, 3));
    const auto out = ensemble_merge(runs);
    expect_rows_normalized(out);
    EXPECT_EQ(out.trajectories.size(), 3u * 6 * 3 * 2);
  }
}

TEST(Ensemble, MemberWeightedMean) {
  // Two modes with nearby endpoints collapse into one cluster of K = 1.
  const std::vector<double> traj{0, 0, 2, 0,   // p = 0.25
                                 0, 0, 6, 0};  // p = 0.75
  const std::vector<double> prob{0.25, 0.75};
  std::vector<double> out_t(4), out_p(1);
  cluster_modes(traj, prob, 2, EnsembleOptions{1, 50}, out_t, out_p);
  EXPECT_NEAR(out_t[2], 0.25 * 2 + 0.75 * 6, 1e-12);
  EXPECT_NEAR(out_p[0], 1.0, 1e-12);
}

TEST(Ensemble, PadsSmallPoolsWithLikelyModes) {
  const std::vector<double> traj{0, 0, 1, 1,  // p = 0.2
                                 0, 0, 5, 5}; // p = 0.8
  const std::vector<double> prob{0.2, 0.8};
  std::vector<double> out_t(3 * 4), out_p(3);
  cluster_modes(traj, prob, 2, EnsembleOptions{3, 50}, out_t, out_p);
  EXPECT_EQ(out_t[10], 5.0);
  EXPECT_NEAR(out_p[0], 0.2, 1e-12);
  EXPECT_NEAR(out_p[1], 0.4, 1e-12);
  EXPECT_NEAR(out_p[2], 0.4, 1e-12);
}

TEST(Ensemble, Deterministic) {
  Rng rng(84);
  std::vector<PredictionDump> runs{spread_dump(rng, 4, 6, 3), spread_dump(rng, 4, 6, 3), spread_dump(rng, 4, 6, 3)};
  const auto a = ensemble_merge(runs), b = ensemble_merge(runs);
  EXPECT_EQ(a.trajectories, b.trajectories);
  EXPECT_EQ(a.probabilities, b.probabilities);
}

TEST(Ensemble, RejectsMismatchedRuns) {
  Rng rng(85);
  auto a = spread_dump(rng, 2, 6, 3), b = spread_dump(rng, 2, 6, 3);
  EXPECT_THROW(ensemble_merge(std::vector<PredictionDump>{}), ContractError);
  b.scenario_id = "other";
  EXPECT_THROW(ensemble_merge(std::vector<PredictionDump>{a, b}), ContractError);
  b = spread_dump(rng, 3, 6, 3);
  EXPECT_THROW(ensemble_merge(std::vector<PredictionDump>{a, b}), ContractError);
  b = spread_dump(rng, 2, 6, 4);
  EXPECT_THROW(ensemble_merge(std::vector<PredictionDump>{a, b}), ContractError);
}

}  // namespace
}  // namespace dgf
