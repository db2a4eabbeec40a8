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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "harness/synth.hpp"
#include "model/config.hpp"
#include "scene/scenario.hpp"

namespace dgf::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0, bool requires_grad = false) {
  std::vector<double> v(static_cast<std::size_t>(numel_of(shape)));
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return INFINITY;
  return max_abs_diff(a.values(), b.values());
}

/// Narrow model that still exercises every block.
inline ModelConfig small_config(int t_h = 7, int t_f = 6) {
  ModelConfig c;
  c.hidden = 16;
  c.heads = 2;
  c.scene_layers = 2;
  c.agent_layers = 2;
  c.t_h = t_h;
  c.t_f = t_f;
  c.pyramid_channels = {8, 12, 16};
  c.dropout = 0.0;
  c.seed = 11;
  return c;
}

inline SynthConfig small_synth(std::uint64_t seed, int n = 4, int t_h = 7, int t_f = 6) {
  SynthConfig s;
  s.seed = seed;
  s.n_scenarios = n;
  s.horizon = {t_h, t_f, 10.0};
  return s;
}

/// Straight-moving agent along +x from `start` with the given speed.
inline AgentTrack straight_track(Vec2 start, double heading, double speed, const Horizon& h, bool with_future = true) {
  AgentTrack a;
  const Vec2 dir{std::cos(heading), std::sin(heading)};
  const double dt = 1.0 / h.hz;
  for (int t = -h.t_h; t <= 0; ++t) {
    a.positions.push_back(start + (speed * dt * (t + h.t_h)) * dir);
    a.headings.push_back(heading);
    a.valid.push_back(true);
  }
  if (with_future) {
    std::vector<Vec2> f;
    for (int t = 1; t <= h.t_f; ++t) f.push_back(a.positions.back() + (speed * dt * t) * dir);
    a.future_gt = f;
  }
  return a;
}

inline LaneSegment straight_lane(Vec2 start, double heading, double spacing = 4.0,
                                 LaneType type = LaneType::kStraight) {
  LaneSegment l;
  const Vec2 dir{std::cos(heading), std::sin(heading)};
  for (int i = 0; i < kLanePoints; ++i) l.points[static_cast<std::size_t>(i)] = start + (spacing * i) * dir;
  l.type = type;
  return l;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dgfnet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace dgf::testing
