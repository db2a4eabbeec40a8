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
#include "model/encoders.hpp"

#include "core/error.hpp"

namespace dgf {

ActorEncoder::ActorEncoder(ParamStore& store, const std::string& name, int in_channels, const ModelConfig& cfg,
                           Rng& rng) {
  std::int64_t c_prev = in_channels;
  for (std::size_t i = 0; i < cfg.pyramid_channels.size(); ++i) {
    const std::string stage = name + ".stage" + std::to_string(i);
    stages_.emplace_back(store, stage + ".res", c_prev, cfg.pyramid_channels[i], cfg.pyramid_strides[i], rng);
    laterals_.emplace_back(store, stage + ".lateral", cfg.pyramid_channels[i], cfg.hidden, 1, 1, false, rng);
    c_prev = cfg.pyramid_channels[i];
  }
}

Tensor ActorEncoder::operator()(const Tensor& tracks) const {
  if (tracks.ndim() != 3) throw DimensionError("actor encoder: input must be [N, T, C], got " + shape_str(tracks.shape()));
  if (tracks.dim(1) < kMinSteps) {
    throw DimensionError("actor encoder: axis 1 (time) has " + std::to_string(tracks.dim(1)) + " steps, need >= " +
                         std::to_string(kMinSteps));
  }
  Tensor x = transpose(tracks, 1, 2);  // [N, C, T]
  std::vector<Tensor> lateral;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    x = stages_[i](x);
    lateral.push_back(laterals_[i](x));
  }
  Tensor out = lateral.back();
  for (int i = static_cast<int>(lateral.size()) - 2; i >= 0; --i) {
    const auto& z = lateral[static_cast<std::size_t>(i)];
    Tensor up = upsample2(out);
    // Odd extents make the upsampled sequence one step longer; keep the front.
    if (up.dim(2) != z.dim(2)) up = slice(up, 2, 0, z.dim(2));
    out = add(up, z);
  }
  const auto n = out.dim(0), c = out.dim(1);
  return reshape(slice(out, 2, out.dim(2) - 1, 1), {n, c});
}

PointAggregateBlock::PointAggregateBlock(ParamStore& store, const std::string& name, int width, bool aggregate_out,
                                         Rng& rng)
    : fc1_(store, name + ".fc1", width, width, rng),
      fc2_(store, name + ".fc2", 2 * width, width, rng),
      norm1_(store, name + ".norm1", width),
      norm2_(store, name + ".norm2", width),
      out_norm_(store, name + ".out_norm", width),
      aggregate_out_(aggregate_out) {}

Tensor PointAggregateBlock::aggregate(const Tensor& points) const {
  return max_over(relu(norm1_(fc1_(points))), 1);
}

Tensor PointAggregateBlock::operator()(const Tensor& points) const {
  if (points.ndim() != 3) throw DimensionError("point aggregate block: input must be [L, P, W]");
  const auto l = points.dim(0), p = points.dim(1), w = points.dim(2);
  Tensor h = relu(norm1_(fc1_(points)));
  Tensor pooled = broadcast_to(reshape(max_over(h, 1), {l, 1, w}), {l, p, w});
  Tensor mixed = relu(norm2_(fc2_(concat({h, pooled}, 2))));
  Tensor out = out_norm_(add(points, mixed));
  return aggregate_out_ ? max_over(out, 1) : out;
}

MapEncoder::MapEncoder(ParamStore& store, const std::string& name, int in_channels, const ModelConfig& cfg, Rng& rng)
    : proj_(store, name + ".proj", in_channels, cfg.hidden, rng),
      proj_norm_(store, name + ".proj_norm", cfg.hidden),
      pab1_(store, name + ".pab1", cfg.hidden, false, rng),
      pab2_(store, name + ".pab2", cfg.hidden, true, rng) {}

Tensor MapEncoder::project(const Tensor& lanes) const { return relu(proj_norm_(proj_(lanes))); }

Tensor MapEncoder::operator()(const Tensor& lanes) const {
  if (lanes.ndim() != 3) throw DimensionError("map encoder: input must be [L, 10, C], got " + shape_str(lanes.shape()));
  if (lanes.dim(1) != 10) {
    throw DimensionError("map encoder: axis 1 (points) must be 10, got " + std::to_string(lanes.dim(1)));
  }
  return pab2_(pab1_(project(lanes)));
}

RpeEncoder::RpeEncoder(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng)
    : fc1_(store, name + ".fc1", 5, cfg.hidden, rng),
      fc2_(store, name + ".fc2", cfg.hidden, cfg.hidden, rng),
      norm_(store, name + ".norm", cfg.hidden) {}

Tensor RpeEncoder::operator()(const Tensor& rpe) const {
  if (rpe.ndim() < 1 || rpe.dim(-1) != 5) throw DimensionError("rpe encoder: last axis must be 5");
  return fc2_(relu(norm_(fc1_(rpe))));
}

}  // namespace dgf
