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
#include "model/heads.hpp"

#include <cmath>

#include "core/error.hpp"

namespace dgf {

namespace {

constexpr int kHeadHiddenLayers = 2;

}  // namespace

PredictionSet PredictionSet::select(std::span<const std::int64_t> rows) const {
  PredictionSet out;
  out.trajectories = index_select(trajectories, 0, rows);
  out.endpoints = index_select(endpoints, 0, rows);
  if (logits.defined()) out.logits = index_select(logits, 0, rows);
  if (probabilities.defined()) out.probabilities = index_select(probabilities, 0, rows);
  return out;
}

TrajectoryDecoder::TrajectoryDecoder(ParamStore& store, const std::string& name, int in_width,
                                     const ModelConfig& cfg, bool with_scores, Rng& rng)
    : end_(store, name + ".end", in_width, in_width, 2LL * cfg.modes, kHeadHiddenLayers, rng),
      refine_(store, name + ".refine", in_width + 2, in_width, 2, kHeadHiddenLayers, rng),
      traj_(store, name + ".traj", in_width + 2, in_width, 2LL * (cfg.t_f - 1), kHeadHiddenLayers, rng),
      with_scores_(with_scores),
      modes_(cfg.modes),
      steps_(cfg.t_f) {
  if (with_scores) cls_ = Mlp(store, name + ".cls", in_width + 2, in_width, 1, kHeadHiddenLayers, rng);
}

PredictionSet TrajectoryDecoder::operator()(const Tensor& features, const Tensor& origins,
                                            std::span<const double> headings) const {
  if (features.ndim() != 2) throw DimensionError("decoder: features must be [N, D]");
  const auto n = features.dim(0), w = features.dim(1);
  const std::int64_t k = modes_, t = steps_;
  if (origins.shape() != Shape{n, 2}) throw DimensionError("decoder: origins must be [N, 2]");
  if (!headings.empty() && static_cast<std::int64_t>(headings.size()) != n) {
    throw DimensionError("decoder: one heading per agent required");
  }

  Tensor per_mode = broadcast_to(reshape(features, {n, 1, w}), {n, k, w});
  Tensor coarse = reshape(end_(features), {n, k, 2});
  Tensor refined = add(coarse, refine_(concat({per_mode, coarse}, 2)));
  Tensor conditioned = concat({per_mode, refined}, 2);
  Tensor mids = reshape(traj_(conditioned), {n, k, t - 1, 2});

  Tensor end_offset = refined;
  if (!headings.empty()) {
    end_offset = rotate2d(end_offset, headings);
    mids = rotate2d(mids, headings);
  }
  PredictionSet out;
  out.endpoints = add(end_offset, broadcast_to(reshape(origins, {n, 1, 2}), {n, k, 2}));
  mids = add(mids, broadcast_to(reshape(origins, {n, 1, 1, 2}), {n, k, t - 1, 2}));
  out.trajectories = concat({mids, reshape(out.endpoints, {n, k, 1, 2})}, 2);
  if (with_scores_) {
    out.logits = reshape(cls_(conditioned), {n, k});
    out.probabilities = softmax(out.logits);
  }
  return out;
}

std::vector<std::int64_t> MaskReport::kept_indices() const {
  std::vector<std::int64_t> idx;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i]) idx.push_back(static_cast<std::int64_t>(i));
  }
  return idx;
}

std::vector<double> endpoint_spread(std::span<const double> endpoints, std::int64_t n, std::int64_t k) {
  if (static_cast<std::int64_t>(endpoints.size()) != n * k * 2 || k < 1) {
    throw DimensionError("endpoint spread: expected " + std::to_string(n * k * 2) + " values");
  }
  std::vector<double> spread(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double* e = endpoints.data() + i * k * 2;
    double cx = 0.0, cy = 0.0;
    for (std::int64_t m = 0; m < k; ++m) {
      cx += e[2 * m];
      cy += e[2 * m + 1];
    }
    cx /= static_cast<double>(k);
    cy /= static_cast<double>(k);
    double total = 0.0;
    for (std::int64_t m = 0; m < k; ++m) total += std::hypot(e[2 * m] - cx, e[2 * m + 1] - cy);
    spread[static_cast<std::size_t>(i)] = total / static_cast<double>(k);
  }
  return spread;
}

MaskReport difficulty_mask(const Tensor& endpoints, double tau) {
  if (endpoints.ndim() != 3 || endpoints.dim(2) != 2) throw DimensionError("difficulty mask: endpoints must be [N, K, 2]");
  MaskReport report;
  report.tau = tau;
  report.spread = endpoint_spread(endpoints.values(), endpoints.dim(0), endpoints.dim(1));
  report.kept.reserve(report.spread.size());
  for (double s : report.spread) report.kept.push_back(s <= tau);
  return report;
}

FutureEncoder::FutureEncoder(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng)
    : mlp_(store, name, 2LL * cfg.modes * cfg.t_f, cfg.hidden, cfg.hidden, 1, rng),
      in_(2LL * cfg.modes * cfg.t_f),
      out_(cfg.hidden) {}

Tensor FutureEncoder::operator()(const Tensor& trajectories) const {
  if (trajectories.ndim() != 4 || trajectories.dim(1) * trajectories.dim(2) * 2 != in_) {
    throw DimensionError("future encoder: trajectories " + shape_str(trajectories.shape()) + " do not match width " +
                         std::to_string(in_));
  }
  const auto m = trajectories.dim(0);
  if (m == 0) return Tensor::zeros({0, out_});
  return mlp_(reshape(trajectories, {m, in_}));
}

FutureEnhancer::FutureEnhancer(ParamStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng)
    : future_block_(store, name + ".future", cfg.hidden, cfg.heads, false, rng),
      lane_block_(store, name + ".lane", cfg.hidden, cfg.heads, false, rng) {}

Tensor FutureEnhancer::operator()(const Tensor& agents, const Tensor& futures, const Tensor& lanes,
                                  const ForwardContext& ctx) const {
  return lane_block_(future_block_(agents, futures, ctx), lanes, ctx);
}

}  // namespace dgf
