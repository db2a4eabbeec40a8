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
#include "model/dgfnet.hpp"

#include "core/error.hpp"

namespace dgf {

PreparedScenario prepare_scenario(const Scenario& s, double lane_radius) {
  validate(s);
  PreparedScenario p;
  p.scenario = s;
  Scenario local = s;
  local.lanes = filter_lanes(s.lanes, s.agents, lane_radius);
  p.lane_count = static_cast<std::int64_t>(local.lanes.size());
  p.scene = build_scene_centric(local);
  p.agent = build_agent_centric(local);

  const auto n = static_cast<std::int64_t>(s.agents.size());
  std::vector<double> origin(static_cast<std::size_t>(2 * n));
  p.anchor_headings.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    origin[2 * u] = p.scene.current_positions[u].x;
    origin[2 * u + 1] = p.scene.current_positions[u].y;
    p.anchor_headings[u] = p.scene.frame.heading_to_local(p.agent.agent_anchors[u].heading);
  }
  p.origins = Tensor::from({n, 2}, std::move(origin));

  for (int t : s.target_agents()) p.targets.push_back(t);
  const std::int64_t t_f = s.horizon.t_f;
  std::vector<double> gt;
  for (std::size_t r = 0; r < p.targets.size(); ++r) {
    const auto& future = s.agents[static_cast<std::size_t>(p.targets[r])].future_gt;
    if (!future) continue;
    p.supervised.push_back(static_cast<std::int64_t>(r));
    for (const auto& w : *future) {
      const Vec2 local = p.scene.frame.to_local(w);
      gt.push_back(local.x);
      gt.push_back(local.y);
    }
  }
  if (!p.supervised.empty()) {
    p.ground_truth = Tensor::from({static_cast<std::int64_t>(p.supervised.size()), t_f, 2}, std::move(gt));
  }
  return p;
}

DgfNet::DgfNet(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(cfg_.seed, {0x6d6f64656cULL});
  agent_actor_ = ActorEncoder(store_, "agent.actor", kAgentChannels, cfg_, rng);
  agent_map_ = MapEncoder(store_, "agent.map", kLaneChannels, cfg_, rng);
  rpe_ = RpeEncoder(store_, "agent.rpe", cfg_, rng);
  agent_interaction_ = AgentInteraction(store_, "agent.interaction", cfg_, rng);
  if (cfg_.sff()) {
    scene_actor_ = ActorEncoder(store_, "scene.actor", kAgentChannels, cfg_, rng);
    scene_map_ = MapEncoder(store_, "scene.map", kLaneChannels, cfg_, rng);
    scene_interaction_ = SceneInteraction(store_, "scene.interaction", cfg_, rng);
  }
  if (cfg_.ffi()) {
    intermediate_decoder_ = TrajectoryDecoder(store_, "intermediate", cfg_.hidden, cfg_, false, rng);
    future_encoder_ = FutureEncoder(store_, "future.encoder", cfg_, rng);
    future_enhancer_ = FutureEnhancer(store_, "future.enhancer", cfg_, rng);
  }
  final_decoder_ = TrajectoryDecoder(store_, "final", cfg_.fused_width(), cfg_, true, rng);
}

ModelOutput DgfNet::forward(const PreparedScenario& p, const ForwardContext& ctx) const {
  const auto& h = p.scenario.horizon;
  if (h.t_f != cfg_.t_f || h.t_h != cfg_.t_h) {
    throw InputError("scenario horizon (t_h=" + std::to_string(h.t_h) + ", t_f=" + std::to_string(h.t_f) +
                     ") does not match the model (t_h=" + std::to_string(cfg_.t_h) +
                     ", t_f=" + std::to_string(cfg_.t_f) + ")");
  }
  ForwardContext fc = ctx;
  fc.dropout = cfg_.dropout;
  const auto n = static_cast<std::int64_t>(p.scenario.agents.size());

  ModelOutput out;
  out.targets = p.targets;

  Tensor agent_feat = agent_actor_(p.agent.agents);
  Tensor lane_feat = agent_map_(p.agent.lanes);
  Tensor edges = rpe_(slice(p.agent.rpe, 0, 0, n));
  Tensor fused = agent_interaction_(agent_feat, lane_feat, edges, fc);

  Tensor scene_agents, scene_lanes;
  if (cfg_.sff()) {
    scene_lanes = scene_map_(p.scene.lanes);
    scene_agents = scene_interaction_(scene_actor_(p.scene.agents), scene_lanes, fc).first;
  }

  if (cfg_.ffi()) {
    out.intermediate = intermediate_decoder_(scene_agents, p.origins).select(p.targets);
    out.mask = difficulty_mask(out.intermediate.endpoints, cfg_.tau);
    if (!cfg_.dm()) out.mask.kept.assign(out.mask.kept.size(), true);
    const auto kept = out.mask.kept_indices();
    Tensor futures = index_select(out.intermediate.trajectories, 0, kept);
    if (cfg_.ffi_agent_frame && !kept.empty()) {
      std::vector<std::int64_t> rows;
      std::vector<double> back;
      for (auto r : kept) {
        rows.push_back(p.targets[static_cast<std::size_t>(r)]);
        back.push_back(-p.anchor_headings[static_cast<std::size_t>(rows.back())]);
      }
      const auto m = static_cast<std::int64_t>(kept.size());
      Tensor origin = broadcast_to(reshape(index_select(p.origins, 0, rows), {m, 1, 1, 2}), futures.shape());
      futures = rotate2d(sub(futures, origin), back);
    }
    fused = future_enhancer_(fused, future_encoder_(futures), scene_lanes, fc);
  }

  if (cfg_.sff()) {
    out.final_prediction = final_decoder_(concat({fused, scene_agents}, 1), p.origins).select(p.targets);
  } else {
    out.final_prediction = final_decoder_(fused, p.origins, p.anchor_headings).select(p.targets);
  }
  return out;
}

}  // namespace dgf

namespace dgf {

namespace {

Tensor int_entry(std::int64_t v) { return Tensor::scalar(static_cast<double>(v)); }

double scalar_entry(const std::vector<NamedTensor>& entries, const std::string& name) {
  const auto* e = find_entry(entries, name);
  if (e == nullptr) throw SchemaError(name + ": missing from checkpoint");
  if (e->tensor.numel() != 1) throw SchemaError(name + ": expected a scalar");
  return e->tensor.item();
}

std::vector<int> int_list_entry(const std::vector<NamedTensor>& entries, const std::string& name) {
  const auto* e = find_entry(entries, name);
  if (e == nullptr) throw SchemaError(name + ": missing from checkpoint");
  std::vector<int> out;
  for (double v : e->tensor.values()) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace

std::vector<NamedTensor> config_entries(const ModelConfig& cfg) {
  auto list = [](const std::vector<int>& v) {
    return Tensor::from({static_cast<std::int64_t>(v.size())}, std::vector<double>(v.begin(), v.end()));
  };
  return {
      {"config.hidden", int_entry(cfg.hidden)},
      {"config.heads", int_entry(cfg.heads)},
      {"config.scene_layers", int_entry(cfg.scene_layers)},
      {"config.agent_layers", int_entry(cfg.agent_layers)},
      {"config.modes", int_entry(cfg.modes)},
      {"config.t_h", int_entry(cfg.t_h)},
      {"config.t_f", int_entry(cfg.t_f)},
      {"config.tau", Tensor::scalar(cfg.tau)},
      {"config.dropout", Tensor::scalar(cfg.dropout)},
      {"config.pyramid_channels", list(cfg.pyramid_channels)},
      {"config.pyramid_strides", list(cfg.pyramid_strides)},
      {"config.use_sff", int_entry(cfg.use_sff)},
      {"config.use_ffi", int_entry(cfg.use_ffi)},
      {"config.use_dm", int_entry(cfg.use_dm)},
      {"config.ffi_agent_frame", int_entry(cfg.ffi_agent_frame)},
      {"config.seed_hi", int_entry(static_cast<std::int64_t>(cfg.seed >> 32))},
      {"config.seed_lo", int_entry(static_cast<std::int64_t>(cfg.seed & 0xffffffffULL))},
  };
}

ModelConfig config_from_entries(const std::vector<NamedTensor>& entries) {
  ModelConfig cfg;
  cfg.hidden = static_cast<int>(scalar_entry(entries, "config.hidden"));
  cfg.heads = static_cast<int>(scalar_entry(entries, "config.heads"));
  cfg.scene_layers = static_cast<int>(scalar_entry(entries, "config.scene_layers"));
  cfg.agent_layers = static_cast<int>(scalar_entry(entries, "config.agent_layers"));
  cfg.modes = static_cast<int>(scalar_entry(entries, "config.modes"));
  cfg.t_h = static_cast<int>(scalar_entry(entries, "config.t_h"));
  cfg.t_f = static_cast<int>(scalar_entry(entries, "config.t_f"));
  cfg.tau = scalar_entry(entries, "config.tau");
  cfg.dropout = scalar_entry(entries, "config.dropout");
  cfg.pyramid_channels = int_list_entry(entries, "config.pyramid_channels");
  cfg.pyramid_strides = int_list_entry(entries, "config.pyramid_strides");
  cfg.use_sff = scalar_entry(entries, "config.use_sff") != 0.0;
  cfg.use_ffi = scalar_entry(entries, "config.use_ffi") != 0.0;
  cfg.use_dm = scalar_entry(entries, "config.use_dm") != 0.0;
  cfg.ffi_agent_frame = scalar_entry(entries, "config.ffi_agent_frame") != 0.0;
  cfg.seed = (static_cast<std::uint64_t>(scalar_entry(entries, "config.seed_hi")) << 32) |
             static_cast<std::uint64_t>(scalar_entry(entries, "config.seed_lo"));
  return cfg;
}

void save_model(const std::string& path, const DgfNet& model, const std::vector<NamedTensor>& extra) {
  std::vector<NamedTensor> entries;
  for (const auto& p : model.params().parameters()) entries.push_back({p.name, p.tensor});
  for (auto& e : config_entries(model.config())) entries.push_back(std::move(e));
  for (const auto& e : extra) entries.push_back(e);
  save_checkpoint(path, entries);
}

std::unique_ptr<DgfNet> load_model(const std::string& path, std::vector<NamedTensor>* entries) {
  auto loaded = load_checkpoint(path);
  auto model = std::make_unique<DgfNet>(config_from_entries(loaded));
  restore_parameters(model->params(), loaded);
  if (entries != nullptr) *entries = std::move(loaded);
  return model;
}

}  // namespace dgf
