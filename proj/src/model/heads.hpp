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
#include <span>
#include <string>
#include <vector>

#include "core/nn.hpp"
#include "model/config.hpp"

namespace dgf {

/// Multi-modal trajectories of a set of agents in the focal frame.
struct PredictionSet {
  Tensor trajectories;   // [N, K, t_f, 2]
  Tensor endpoints;      // [N, K, 2]; equals the last trajectory step
  Tensor logits;         // [N, K]; undefined without a classification head
  Tensor probabilities;  // [N, K]; undefined without a classification head

  std::int64_t agents() const { return trajectories.defined() ? trajectories.dim(0) : 0; }
  /// Row subset of every defined member.
  PredictionSet select(std::span<const std::int64_t> rows) const;
};

/// Endpoint-first decoder: coarse endpoints, endpoint refinement, then the
/// remaining steps conditioned on the refined endpoint. Offsets are decoded
/// relative to an origin (and optionally a heading) per agent. Hidden layers
/// match the input width.
class TrajectoryDecoder {
 public:
  TrajectoryDecoder() = default;
  TrajectoryDecoder(ParamStore& store, const std::string& name, int in_width, const ModelConfig& cfg,
                    bool with_scores, Rng& rng);

  /// features [N, in_width]; origins [N, 2] (constant). When headings is
  /// non-empty, offsets are rotated by the per-agent heading first.
  PredictionSet operator()(const Tensor& features, const Tensor& origins, std::span<const double> headings = {}) const;

  int modes() const { return modes_; }
  int steps() const { return steps_; }

 private:
  Mlp end_, refine_, traj_, cls_;
  bool with_scores_ = false;
  int modes_ = 0, steps_ = 0;
};

/// Outcome of the difficulty masker over one set of agents.
struct MaskReport {
  std::vector<bool> kept;
  std::vector<double> spread;
  double tau = 0.0;

  std::vector<std::int64_t> kept_indices() const;
};

/// Mean distance of each agent's K endpoints to their centroid.
/// endpoints: row-major [n, k, 2].
std::vector<double> endpoint_spread(std::span<const double> endpoints, std::int64_t n, std::int64_t k);

/// Keeps agents with spread <= tau. Reads values only; never records a graph.
MaskReport difficulty_mask(const Tensor& endpoints, double tau);

/// Flattened multi-modal futures -> one feature per agent.
class FutureEncoder {
 public:
  FutureEncoder() = default;
  FutureEncoder(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);
  /// [M, K, t_f, 2] -> [M, hidden]; M may be 0.
  Tensor operator()(const Tensor& trajectories) const;

 private:
  Mlp mlp_;
  std::int64_t in_ = 0, out_ = 0;
};

/// Agents attend future features, then the scene-centric lane features.
class FutureEnhancer {
 public:
  FutureEnhancer() = default;
  FutureEnhancer(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);
  /// agents [N, D], futures [M, D] (M may be 0), lanes [L, D] -> [N, D].
  Tensor operator()(const Tensor& agents, const Tensor& futures, const Tensor& lanes, const ForwardContext& ctx) const;

 private:
  AttentionBlock future_block_, lane_block_;
};

}  // namespace dgf
