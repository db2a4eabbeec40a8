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
#include "eval/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/error.hpp"

namespace dgf {

namespace {

struct Point {
  double x, y;
};

double dist2(Point a, Point b) { return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y); }

std::int64_t nearest(Point p, const std::vector<Point>& centres) {
  std::int64_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centres.size(); ++c) {
    const double d = dist2(p, centres[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::int64_t>(c);
    }
  }
  return best;
}

}  // namespace

void cluster_modes(std::span<const double> trajectories, std::span<const double> probabilities, std::int64_t steps,
                   const EnsembleOptions& opt, std::span<double> out_trajectories,
                   std::span<double> out_probabilities) {
  const auto pool = static_cast<std::int64_t>(probabilities.size());
  const std::int64_t k = opt.modes;
  const std::int64_t stride = steps * 2;
  if (pool < 1 || k < 1) throw ContractError("ensemble: empty mode pool");
  if (static_cast<std::int64_t>(trajectories.size()) != pool * stride) {
    throw DimensionError("ensemble: trajectories do not match [pool, steps, 2]");
  }
  if (static_cast<std::int64_t>(out_trajectories.size()) != k * stride ||
      static_cast<std::int64_t>(out_probabilities.size()) != k) {
    throw DimensionError("ensemble: output buffers do not match [modes, steps, 2]");
  }
  const double total_p = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  auto weight = [&](std::int64_t i) {
    return total_p > 0.0 ? probabilities[static_cast<std::size_t>(i)] / total_p : 1.0 / static_cast<double>(pool);
  };
  auto copy_mode = [&](std::int64_t from, std::int64_t to) {
    std::copy_n(trajectories.begin() + from * stride, stride, out_trajectories.begin() + to * stride);
  };

  if (pool <= k) {
    for (std::int64_t i = 0; i < pool; ++i) {
      copy_mode(i, i);
      out_probabilities[static_cast<std::size_t>(i)] = weight(i);
    }
    std::vector<std::int64_t> order(static_cast<std::size_t>(pool));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
      return probabilities[static_cast<std::size_t>(a)] > probabilities[static_cast<std::size_t>(b)];
    });
    std::vector<int> copies(static_cast<std::size_t>(pool), 1);
    for (std::int64_t j = pool; j < k; ++j) {
      const auto src = order[static_cast<std::size_t>((j - pool) % pool)];
      copy_mode(src, j);
      ++copies[static_cast<std::size_t>(src)];
    }
    for (std::int64_t j = pool; j < k; ++j) {
      const auto src = order[static_cast<std::size_t>((j - pool) % pool)];
      out_probabilities[static_cast<std::size_t>(j)] = weight(src) / copies[static_cast<std::size_t>(src)];
    }
    for (std::int64_t i = 0; i < pool; ++i) {
      out_probabilities[static_cast<std::size_t>(i)] /= copies[static_cast<std::size_t>(i)];
    }
    return;
  }

  std::vector<Point> ends(static_cast<std::size_t>(pool));
  for (std::int64_t i = 0; i < pool; ++i) {
    ends[static_cast<std::size_t>(i)] = {trajectories[static_cast<std::size_t>((i + 1) * stride - 2)],
                                         trajectories[static_cast<std::size_t>((i + 1) * stride - 1)]};
  }

  // Farthest-point initialization from the most probable mode.
  std::vector<Point> centres;
  const auto first = std::max_element(probabilities.begin(), probabilities.end()) - probabilities.begin();
  centres.push_back(ends[static_cast<std::size_t>(first)]);
  std::vector<double> gap(static_cast<std::size_t>(pool));
  for (std::int64_t i = 0; i < pool; ++i) gap[static_cast<std::size_t>(i)] = dist2(ends[static_cast<std::size_t>(i)], centres[0]);
  while (static_cast<std::int64_t>(centres.size()) < k) {
    const auto far = std::max_element(gap.begin(), gap.end()) - gap.begin();
    centres.push_back(ends[static_cast<std::size_t>(far)]);
    for (std::int64_t i = 0; i < pool; ++i) {
      auto& g = gap[static_cast<std::size_t>(i)];
      g = std::min(g, dist2(ends[static_cast<std::size_t>(i)], centres.back()));
    }
  }

  std::vector<std::int64_t> assign(static_cast<std::size_t>(pool), -1);
  for (int iter = 0; iter < opt.iterations; ++iter) {
    bool changed = false;
    for (std::int64_t i = 0; i < pool; ++i) {
      const auto c = nearest(ends[static_cast<std::size_t>(i)], centres);
      if (c != assign[static_cast<std::size_t>(i)]) {
        assign[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    // Reseed empty clusters from the point farthest from its own centre.
    for (std::int64_t c = 0; c < k; ++c) {
      if (std::find(assign.begin(), assign.end(), c) != assign.end()) continue;
      std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
      for (auto a : assign) ++sizes[static_cast<std::size_t>(a)];
      std::int64_t far = -1;
      double far_d = -1.0;
      for (std::int64_t i = 0; i < pool; ++i) {
        const auto a = assign[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(a)] < 2) continue;
        const double d = dist2(ends[static_cast<std::size_t>(i)], centres[static_cast<std::size_t>(a)]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) break;
      assign[static_cast<std::size_t>(far)] = c;
      centres[static_cast<std::size_t>(c)] = ends[static_cast<std::size_t>(far)];
      changed = true;
    }
    for (std::int64_t c = 0; c < k; ++c) {
      double sx = 0.0, sy = 0.0;
      std::int64_t count = 0;
      for (std::int64_t i = 0; i < pool; ++i) {
        if (assign[static_cast<std::size_t>(i)] != c) continue;
        sx += ends[static_cast<std::size_t>(i)].x;
        sy += ends[static_cast<std::size_t>(i)].y;
        ++count;
      }
      if (count > 0) centres[static_cast<std::size_t>(c)] = {sx / static_cast<double>(count), sy / static_cast<double>(count)};
    }
    if (!changed) break;
  }

  // Order clusters by their smallest member index.
  std::vector<std::int64_t> first_member(static_cast<std::size_t>(k), pool);
  for (std::int64_t i = pool - 1; i >= 0; --i) first_member[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] = i;
  std::vector<std::int64_t> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return first_member[static_cast<std::size_t>(a)] < first_member[static_cast<std::size_t>(b)];
  });

  for (std::int64_t slot = 0; slot < k; ++slot) {
    const auto c = order[static_cast<std::size_t>(slot)];
    double w_sum = 0.0;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < pool; ++i) {
      if (assign[static_cast<std::size_t>(i)] == c) {
        w_sum += weight(i);
        ++count;
      }
    }
    auto out = out_trajectories.subspan(static_cast<std::size_t>(slot * stride), static_cast<std::size_t>(stride));
    std::fill(out.begin(), out.end(), 0.0);
    for (std::int64_t i = 0; i < pool; ++i) {
      if (assign[static_cast<std::size_t>(i)] != c) continue;
      const double w = w_sum > 0.0 ? weight(i) / w_sum : 1.0 / static_cast<double>(count);
      for (std::int64_t e = 0; e < stride; ++e) out[static_cast<std::size_t>(e)] += w * trajectories[static_cast<std::size_t>(i * stride + e)];
    }
    out_probabilities[static_cast<std::size_t>(slot)] = w_sum;
  }
  const double norm = std::accumulate(out_probabilities.begin(), out_probabilities.end(), 0.0);
  for (auto& p : out_probabilities) p = norm > 0.0 ? p / norm : 1.0 / static_cast<double>(k);
}

PredictionDump ensemble_merge(std::span<const PredictionDump> runs, const EnsembleOptions& opt) {
  if (runs.empty()) throw ContractError("ensemble: no runs");
  const auto& ref = runs.front();
  for (const auto& r : runs) {
    r.validate();
    if (r.scenario_id != ref.scenario_id) throw ContractError("ensemble: runs cover different scenarios");
    if (r.agent_ids != ref.agent_ids) throw ContractError("ensemble: runs cover different agents");
    if (r.steps != ref.steps) throw ContractError("ensemble: runs have different horizons");
  }
  PredictionDump out;
  out.scenario_id = ref.scenario_id;
  out.agent_ids = ref.agent_ids;
  out.modes = opt.modes;
  out.steps = ref.steps;
  out.kept = ref.kept;
  out.spread = ref.spread;
  const auto n = ref.agents();
  const std::int64_t stride = ref.steps * 2;
  out.trajectories.resize(static_cast<std::size_t>(n * opt.modes * stride));
  out.probabilities.resize(static_cast<std::size_t>(n * opt.modes));
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<double> traj, probs;
    for (const auto& r : runs) {
      traj.insert(traj.end(), r.trajectories.begin() + i * r.modes * stride,
                  r.trajectories.begin() + (i + 1) * r.modes * stride);
      probs.insert(probs.end(), r.probabilities.begin() + i * r.modes, r.probabilities.begin() + (i + 1) * r.modes);
    }
    cluster_modes(traj, probs, ref.steps, opt,
                  std::span<double>(out.trajectories).subspan(static_cast<std::size_t>(i * opt.modes * stride),
                                                              static_cast<std::size_t>(opt.modes * stride)),
                  std::span<double>(out.probabilities).subspan(static_cast<std::size_t>(i * opt.modes),
                                                               static_cast<std::size_t>(opt.modes)));
  }
  return out;
}

}  // namespace dgf
