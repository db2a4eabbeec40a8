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
#include <optional>
#include <span>
#include <vector>

#include "scene/geometry.hpp"
#include "scene/scenario.hpp"

namespace dgf {

/// Flat, frame-agnostic view of a multi-modal prediction for metric code.
struct ModeView {
  std::int64_t agents = 0, modes = 0, steps = 0;
  std::span<const double> trajectories;   // [agents, modes, steps, 2]
  std::span<const double> probabilities;  // [agents, modes]
};

struct MetricReport {
  double min_ade_k6 = 0.0;
  double min_fde_k6 = 0.0;
  double p_min_fde_k6 = 0.0;
  double miss_rate_k6 = 0.0;
  double min_ade_k1 = 0.0;
  double min_fde_k1 = 0.0;
  std::optional<double> dac;
  std::int64_t n_agents = 0;
  std::vector<double> per_agent_min_fde;
};

inline constexpr double kMissThreshold = 2.0;
inline constexpr double kProbabilityFloor = 0.05;

/// gt: [agents, steps, 2] in the same frame as the prediction. The drivable
/// area, when given, must share that frame too. Throws ContractError when
/// probabilities are missing.
MetricReport compute_metrics(const ModeView& pred, std::span<const double> gt,
                             const std::vector<Polygon>* area = nullptr);

/// Agent-weighted mean of several reports. DAC is averaged over the reports
/// that carry it, weighted by their trajectory counts.
MetricReport combine_reports(std::span<const MetricReport> reports);

/// Even-odd rule; points exactly on an edge may fall either way.
bool point_in_polygon(Vec2 p, const Polygon& poly);
bool inside_area(Vec2 p, const std::vector<Polygon>& area);

/// Union of per-segment rectangles of half-width half_width around every lane,
/// each extended by half_width past its endpoints.
std::vector<Polygon> lane_drivable_area(const std::vector<LaneSegment>& lanes, double half_width);

/// Mean of the top ceil(f * n) values for each fraction f.
std::vector<double> slice_hardest(std::span<const double> per_agent, std::span<const double> fractions);

}  // namespace dgf
