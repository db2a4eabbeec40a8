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
#include "eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "core/error.hpp"

namespace dgf {

namespace {

double displacement(const double* a, const double* b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace

MetricReport compute_metrics(const ModeView& pred, std::span<const double> gt, const std::vector<Polygon>* area) {
  const auto n = pred.agents, k = pred.modes, t = pred.steps;
  if (k < 1 || t < 1) throw ContractError("metrics: need at least one mode and one step");
  if (static_cast<std::int64_t>(pred.trajectories.size()) != n * k * t * 2) {
    throw DimensionError("metrics: trajectories do not match [agents, modes, steps, 2]");
  }
  if (static_cast<std::int64_t>(gt.size()) != n * t * 2) throw DimensionError("metrics: ground truth must be [agents, steps, 2]");
  if (static_cast<std::int64_t>(pred.probabilities.size()) != n * k) {
    throw ContractError("metrics: mode probabilities are required");
  }
  if (n == 0) throw ContractError("metrics: no agents");

  MetricReport r;
  r.n_agents = n;
  std::int64_t inside = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double* g = gt.data() + i * t * 2;
    double best_ade = std::numeric_limits<double>::infinity();
    double best_fde = std::numeric_limits<double>::infinity();
    std::int64_t best_end = 0, top = 0;
    std::vector<double> ade(static_cast<std::size_t>(k)), fde(static_cast<std::size_t>(k));
    for (std::int64_t m = 0; m < k; ++m) {
      const double* p = pred.trajectories.data() + (i * k + m) * t * 2;
      double total = 0.0;
      for (std::int64_t s = 0; s < t; ++s) total += displacement(p + 2 * s, g + 2 * s);
      ade[static_cast<std::size_t>(m)] = total / static_cast<double>(t);
      fde[static_cast<std::size_t>(m)] = displacement(p + 2 * (t - 1), g + 2 * (t - 1));
      best_ade = std::min(best_ade, ade[static_cast<std::size_t>(m)]);
      if (fde[static_cast<std::size_t>(m)] < best_fde) {
        best_fde = fde[static_cast<std::size_t>(m)];
        best_end = m;
      }
      if (pred.probabilities[static_cast<std::size_t>(i * k + m)] >
          pred.probabilities[static_cast<std::size_t>(i * k + top)]) {
        top = m;
      }
      if (area) {
        bool all_in = true;
        for (std::int64_t s = 0; s < t && all_in; ++s) all_in = inside_area({p[2 * s], p[2 * s + 1]}, *area);
        inside += all_in ? 1 : 0;
      }
    }
    const double p_best = pred.probabilities[static_cast<std::size_t>(i * k + best_end)];
    r.min_ade_k6 += best_ade;
    r.min_fde_k6 += best_fde;
    r.p_min_fde_k6 += best_fde + std::min(-std::log(p_best), -std::log(kProbabilityFloor));
    r.miss_rate_k6 += best_fde > kMissThreshold ? 1.0 : 0.0;
    r.min_ade_k1 += ade[static_cast<std::size_t>(top)];
    r.min_fde_k1 += fde[static_cast<std::size_t>(top)];
    r.per_agent_min_fde.push_back(best_fde);
  }
  const double dn = static_cast<double>(n);
  r.min_ade_k6 /= dn;
  r.min_fde_k6 /= dn;
  r.p_min_fde_k6 /= dn;
  r.miss_rate_k6 /= dn;
  r.min_ade_k1 /= dn;
  r.min_fde_k1 /= dn;
  if (area) r.dac = static_cast<double>(inside) / static_cast<double>(n * k);
  return r;
}

MetricReport combine_reports(std::span<const MetricReport> reports) {
  MetricReport out;
  double dac_sum = 0.0, dac_weight = 0.0;
  for (const auto& r : reports) {
    const double w = static_cast<double>(r.n_agents);
    out.min_ade_k6 += w * r.min_ade_k6;
    out.min_fde_k6 += w * r.min_fde_k6;
    out.p_min_fde_k6 += w * r.p_min_fde_k6;
    out.miss_rate_k6 += w * r.miss_rate_k6;
    out.min_ade_k1 += w * r.min_ade_k1;
    out.min_fde_k1 += w * r.min_fde_k1;
    out.n_agents += r.n_agents;
    out.per_agent_min_fde.insert(out.per_agent_min_fde.end(), r.per_agent_min_fde.begin(), r.per_agent_min_fde.end());
    if (r.dac) {
      dac_sum += w * *r.dac;
      dac_weight += w;
    }
  }
  if (out.n_agents > 0) {
    const double dn = static_cast<double>(out.n_agents);
    out.min_ade_k6 /= dn;
    out.min_fde_k6 /= dn;
    out.p_min_fde_k6 /= dn;
    out.miss_rate_k6 /= dn;
    out.min_ade_k1 /= dn;
    out.min_fde_k1 /= dn;
  }
  if (dac_weight > 0.0) out.dac = dac_sum / dac_weight;
  return out;
}

bool point_in_polygon(Vec2 p, const Polygon& poly) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

bool inside_area(Vec2 p, const std::vector<Polygon>& area) {
  return std::any_of(area.begin(), area.end(), [&](const Polygon& poly) { return point_in_polygon(p, poly); });
}

std::vector<Polygon> lane_drivable_area(const std::vector<LaneSegment>& lanes, double half_width) {
  if (!(half_width > 0.0)) throw ContractError("drivable area: half width must be positive");
  std::vector<Polygon> area;
  for (const auto& lane : lanes) {
    for (std::size_t i = 0; i + 1 < lane.points.size(); ++i) {
      const Vec2 a = lane.points[i], b = lane.points[i + 1];
      const double len = distance(a, b);
      if (len <= 0.0) continue;
      const Vec2 u{(b.x - a.x) / len * half_width, (b.y - a.y) / len * half_width};
      const Vec2 v{-u.y, u.x};
      const Vec2 s = a - u, e = b + u;
      area.push_back({s + v, e + v, e - v, s - v});
    }
  }
  return area;
}

std::vector<double> slice_hardest(std::span<const double> per_agent, std::span<const double> fractions) {
  if (per_agent.empty()) throw ContractError("slice_hardest: no values");
  std::vector<double> sorted(per_agent.begin(), per_agent.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<double> out;
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ContractError("slice_hardest: fractions must be in (0, 1]");
    const auto n = static_cast<double>(sorted.size());
    auto count = static_cast<std::size_t>(std::ceil(f * n - 1e-9));
    count = std::clamp<std::size_t>(count, 1, sorted.size());
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) total += sorted[i];
    out.push_back(total / static_cast<double>(count));
  }
  return out;
}

}  // namespace dgf
