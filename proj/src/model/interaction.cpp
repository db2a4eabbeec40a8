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
#include "model/interaction.hpp"

#include "core/error.hpp"

namespace dgf {

SceneInteraction::SceneInteraction(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng) {
  for (int i = 0; i < cfg.scene_layers; ++i) {
    const std::string p = name + ".layer" + std::to_string(i);
    layers_.push_back(Layer{AttentionBlock(store, p + ".ma", cfg.hidden, cfg.heads, false, rng),
                            AttentionBlock(store, p + ".mm", cfg.hidden, cfg.heads, false, rng),
                            AttentionBlock(store, p + ".am", cfg.hidden, cfg.heads, false, rng),
                            AttentionBlock(store, p + ".aa", cfg.hidden, cfg.heads, false, rng)});
  }
}

std::pair<Tensor, Tensor> SceneInteraction::operator()(const Tensor& agents, const Tensor& lanes,
                                                       const ForwardContext& ctx) const {
  if (agents.ndim() != 2 || lanes.ndim() != 2 || agents.dim(1) != lanes.dim(1)) {
    throw DimensionError("scene interaction: expected agents [N, D] and lanes [L, D], got " +
                         shape_str(agents.shape()) + " and " + shape_str(lanes.shape()));
  }
  if (agents.dim(0) == 0) throw ContractError("scene interaction: no agents");
  Tensor x = agents, m = lanes;
  for (const auto& layer : layers_) {
    m = layer.lane_agent(m, x, ctx);
    m = layer.lane_lane(m, m, ctx);
    x = layer.agent_lane(x, m, ctx);
    x = layer.agent_agent(x, x, ctx);
  }
  return {x, m};
}

AgentInteraction::AgentInteraction(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng) {
  for (int i = 0; i < cfg.agent_layers; ++i) {
    layers_.emplace_back(store, name + ".layer" + std::to_string(i), cfg.hidden, cfg.heads, true, rng);
  }
}

Tensor AgentInteraction::operator()(const Tensor& agents, const Tensor& lanes, const Tensor& edges,
                                    const ForwardContext& ctx) const {
  if (agents.ndim() != 2 || lanes.ndim() != 2 || agents.dim(1) != lanes.dim(1)) {
    throw DimensionError("agent interaction: expected agents [N, D] and lanes [L, D]");
  }
  const auto n = agents.dim(0), total = n + lanes.dim(0);
  if (edges.ndim() != 3 || edges.dim(1) != total || (edges.dim(0) != n && edges.dim(0) != total) ||
      edges.dim(2) != agents.dim(1)) {
    throw DimensionError("agent interaction: relative pose grid " + shape_str(edges.shape()) + " does not match " +
                         std::to_string(n) + " agents and " + std::to_string(lanes.dim(0)) + " lanes");
  }
  const Tensor agent_edges = edges.dim(0) == n ? edges : slice(edges, 0, 0, n);
  Tensor a = agents;
  for (const auto& layer : layers_) {
    a = layer(a, concat({a, lanes}, 0), agent_edges, ctx);
  }
  return a;
}

}  // namespace dgf
