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
#include <vector>

#include "core/nn.hpp"
#include "model/config.hpp"

namespace dgf {

/// 1-D convolution pyramid over agent histories with top-down interpolation
/// fusion. [N, T, C] -> [N, hidden], read at the last time step.
class ActorEncoder {
 public:
  ActorEncoder() = default;
  ActorEncoder(ParamStore& store, const std::string& name, int in_channels, const ModelConfig& cfg, Rng& rng);
  Tensor operator()(const Tensor& tracks) const;

  /// Shortest history the pyramid accepts.
  static constexpr int kMinSteps = 4;

 private:
  std::vector<Res1d> stages_;
  std::vector<ConvNorm> laterals_;
};

/// Per-point MLP, max over the lane's points, concat, MLP and residual norm.
/// With aggregate_out the block also max-pools its output over points.
class PointAggregateBlock {
 public:
  PointAggregateBlock() = default;
  PointAggregateBlock(ParamStore& store, const std::string& name, int width, bool aggregate_out, Rng& rng);
  /// [L, P, W] -> [L, P, W], or [L, W] with aggregate_out.
  Tensor operator()(const Tensor& points) const;
  /// The permutation-invariant component: max over points of the first MLP.
  Tensor aggregate(const Tensor& points) const;

 private:
  Linear fc1_, fc2_;
  LayerNorm norm1_, norm2_, out_norm_;
  bool aggregate_out_ = false;
};

/// [L, 10, C_in] -> [L, hidden].
class MapEncoder {
 public:
  MapEncoder() = default;
  MapEncoder(ParamStore& store, const std::string& name, int in_channels, const ModelConfig& cfg, Rng& rng);
  Tensor operator()(const Tensor& lanes) const;

  const PointAggregateBlock& block(int i) const { return i == 0 ? pab1_ : pab2_; }
  /// Projection + norm + ReLU applied pointwise before the blocks.
  Tensor project(const Tensor& lanes) const;

 private:
  Linear proj_;
  LayerNorm proj_norm_;
  PointAggregateBlock pab1_, pab2_;
};

/// Two-layer MLP on relative-pose entries: [..., 5] -> [..., hidden].
class RpeEncoder {
 public:
  RpeEncoder() = default;
  RpeEncoder(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);
  Tensor operator()(const Tensor& rpe) const;

 private:
  Linear fc1_, fc2_;
  LayerNorm norm_;
};

}  // namespace dgf
