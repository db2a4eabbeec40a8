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
#include "eval/pipeline.hpp"

#include "core/error.hpp"

namespace dgf {

PredictionDump to_dump(const PreparedScenario& p, const ModelOutput& out) {
  const auto& pred = out.final_prediction;
  PredictionDump d;
  d.scenario_id = p.scenario.id;
  d.modes = pred.trajectories.dim(1);
  d.steps = pred.trajectories.dim(2);
  for (auto t : out.targets) d.agent_ids.push_back(static_cast<int>(t));
  auto traj = pred.trajectories.values();
  d.trajectories.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); i += 2) {
    const Vec2 w = p.scene.frame.to_world({traj[i], traj[i + 1]});
    d.trajectories.push_back(w.x);
    d.trajectories.push_back(w.y);
  }
  auto probs = pred.probabilities.values();
  d.probabilities.assign(probs.begin(), probs.end());
  if (out.mask.kept.empty()) {
    d.kept.assign(out.targets.size(), true);
    d.spread.assign(out.targets.size(), 0.0);
  } else {
    d.kept = out.mask.kept;
    d.spread = out.mask.spread;
  }
  return d;
}

PredictionDump predict(const DgfNet& model, const PreparedScenario& p) {
  NoGradGuard guard;
  return to_dump(p, model.forward(p, ForwardContext{}));
}

std::optional<MetricReport> evaluate_dump(const Scenario& s, const PredictionDump& d, const EvalOptions& opt) {
  d.validate();
  if (d.scenario_id != s.id) throw ContractError("evaluate: dump " + d.scenario_id + " does not belong to " + s.id);
  if (d.steps != s.horizon.t_f) throw ContractError("evaluate: dump horizon does not match scenario " + s.id);
  const std::int64_t stride = d.modes * d.steps * 2;
  std::vector<double> traj, probs, gt;
  std::int64_t n = 0;
  for (std::int64_t i = 0; i < d.agents(); ++i) {
    const auto id = d.agent_ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= static_cast<int>(s.agents.size())) throw SchemaError("agent_ids: index out of range");
    const auto& future = s.agents[static_cast<std::size_t>(id)].future_gt;
    if (!future) continue;
    traj.insert(traj.end(), d.trajectories.begin() + i * stride, d.trajectories.begin() + (i + 1) * stride);
    probs.insert(probs.end(), d.probabilities.begin() + i * d.modes, d.probabilities.begin() + (i + 1) * d.modes);
    for (const auto& w : *future) {
      gt.push_back(w.x);
      gt.push_back(w.y);
    }
    ++n;
  }
  if (n == 0) return std::nullopt;
  std::vector<Polygon> area;
  if (opt.with_dac) area = s.drivable_area ? *s.drivable_area : lane_drivable_area(s.lanes, opt.lane_half_width);
  return compute_metrics({n, d.modes, d.steps, traj, probs}, gt, opt.with_dac ? &area : nullptr);
}

MetricReport evaluate_model(const DgfNet& model, std::span<const PreparedScenario> data, const EvalOptions& opt) {
  std::vector<MetricReport> reports;
  for (const auto& p : data) {
    if (auto r = evaluate_dump(p.scenario, predict(model, p), opt)) reports.push_back(std::move(*r));
  }
  return combine_reports(reports);
}

}  // namespace dgf
