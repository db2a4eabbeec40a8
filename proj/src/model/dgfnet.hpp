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
#include <memory>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/nn.hpp"
#include "model/config.hpp"
#include "model/encoders.hpp"
#include "model/heads.hpp"
#include "model/interaction.hpp"
#include "scene/views.hpp"

namespace dgf {

/// A scenario with lanes filtered and both views built, ready for forward().
struct PreparedScenario {
  Scenario scenario;                   // as given, lanes unfiltered
  std::int64_t lane_count = 0;         // lanes that survived filtering
  SceneCentricView scene;
  AgentCentricView agent;
  std::vector<std::int64_t> targets;   // agent rows that get predictions
  Tensor origins;                      // [N, 2] agent anchors in the focal frame
  std::vector<double> anchor_headings; // [N] agent anchor headings in the focal frame
  /// Rows of targets that carry ground truth, and that ground truth in the
  /// focal frame: [supervised, t_f, 2]. Undefined when nothing is supervised.
  std::vector<std::int64_t> supervised;
  Tensor ground_truth;
};

/// Throws InputError when the focal agent is unobserved at t = 0 or no lane
/// lies near any agent.
PreparedScenario prepare_scenario(const Scenario& s, double lane_radius = kLaneRadius);

struct ModelOutput {
  PredictionSet final_prediction;  // per target, focal frame
  PredictionSet intermediate;      // per target; empty without future interaction
  MaskReport mask;                 // per target
  std::vector<std::int64_t> targets;
};

class DgfNet {
 public:
  explicit DgfNet(const ModelConfig& cfg);
  DgfNet(const DgfNet&) = delete;
  DgfNet& operator=(const DgfNet&) = delete;

  ModelOutput forward(const PreparedScenario& p, const ForwardContext& ctx) const;

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

 private:
  ModelConfig cfg_;
  ParamStore store_;
  ActorEncoder scene_actor_, agent_actor_;
  MapEncoder scene_map_, agent_map_;
  RpeEncoder rpe_;
  SceneInteraction scene_interaction_;
  AgentInteraction agent_interaction_;
  TrajectoryDecoder intermediate_decoder_;
  FutureEncoder future_encoder_;
  FutureEnhancer future_enhancer_;
  TrajectoryDecoder final_decoder_;
};

/// Architecture as "config.*" scalar entries, enough to rebuild the model.
std::vector<NamedTensor> config_entries(const ModelConfig& cfg);
/// Throws SchemaError when a required entry is missing.
ModelConfig config_from_entries(const std::vector<NamedTensor>& entries);

/// Writes parameters, architecture and any extra entries (optimizer state,
/// counters) to one checkpoint file.
void save_model(const std::string& path, const DgfNet& model, const std::vector<NamedTensor>& extra = {});
/// Rebuilds a model from a checkpoint. All entries are returned through
/// `entries` when it is non-null.
std::unique_ptr<DgfNet> load_model(const std::string& path, std::vector<NamedTensor>* entries = nullptr);

}  // namespace dgf
