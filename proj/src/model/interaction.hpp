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

#include <string>
#include <utility>
#include <vector>

#include "core/nn.hpp"
#include "model/config.hpp"

namespace dgf {

/// Stacked agent/lane attention in the focal frame. Each layer runs, in order:
/// lanes attend agents, lanes attend lanes, agents attend the updated lanes,
/// agents attend agents.
class SceneInteraction {
 public:
  SceneInteraction() = default;
  SceneInteraction(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);

  /// agents [N, D], lanes [L, D] -> (agents, lanes).
  std::pair<Tensor, Tensor> operator()(const Tensor& agents, const Tensor& lanes, const ForwardContext& ctx) const;

 private:
  struct Layer {
    AttentionBlock lane_agent, lane_lane, agent_lane, agent_agent;
  };
  std::vector<Layer> layers_;
};

/// Agent-centric interaction: each agent attends every agent and lane with
/// edge features from the encoded relative poses. Lanes stay fixed.
class AgentInteraction {
 public:
  AgentInteraction() = default;
  AgentInteraction(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);

  /// agents [N, D], lanes [L, D], edges [N, N + L, D] or the full
  /// [N + L, N + L, D] grid (agent rows are used).
  Tensor operator()(const Tensor& agents, const Tensor& lanes, const Tensor& edges, const ForwardContext& ctx) const;

 private:
  std::vector<AttentionBlock> layers_;
};

}  // namespace dgf
