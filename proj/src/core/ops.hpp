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
#include <initializer_list>
#include <span>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace dgf {

// Elementwise (identical shapes unless noted).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor relu(const Tensor& x);

/// Numpy-style broadcast (align right, expand size-1 or missing axes).
Tensor broadcast_to(const Tensor& x, const Shape& shape);

// Layout.
Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose(const Tensor& x, int axis_a, int axis_b);
Tensor concat(std::span<const Tensor> parts, int axis);
Tensor concat(std::initializer_list<Tensor> parts, int axis);
Tensor slice(const Tensor& x, int axis, std::int64_t start, std::int64_t length);
Tensor index_select(const Tensor& x, int axis, std::span<const std::int64_t> indices);
/// x: [N, K, ...] -> [N, ...], picking entry indices[n] along axis 1 for row n.
Tensor gather_modes(const Tensor& x, std::span<const std::int64_t> indices);

// Reductions.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Max over one axis, which is removed. Gradient goes to the first maximum.
Tensor max_over(const Tensor& x, int axis);

// Dense layers.
Tensor matmul(const Tensor& a, const Tensor& b);
/// x: [..., in], weight: [out, in], bias: [out] or undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
/// x: [n, c_in, t], weight: [c_out, c_in, k], bias: [c_out] or undefined.
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding);
/// Normalizes over one axis; gamma/beta (extent of that axis) may be undefined.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, int axis, double eps = 1e-5);
/// Softmax over the last axis.
Tensor softmax(const Tensor& x);
/// Corner-aligned linear interpolation doubling the last axis: [n, c, t] -> [n, c, 2t].
Tensor upsample2(const Tensor& x);
/// Inverted dropout. Identity (same handle) when !training or rate == 0.
Tensor dropout(const Tensor& x, double rate, bool training, Rng* rng);
/// Rotates the trailing xy pairs of row n of x: [N, ..., 2] by angles[n].
Tensor rotate2d(const Tensor& x, std::span<const double> angles);

// Attention.
struct AttentionOutput {
  Tensor output;
  /// Softmax weights laid out [n_q, heads, n_k].
  std::vector<double> weights;
};

/// Multi-head scaled dot-product attention on already projected inputs.
/// Q: [n_q, d], K: [n_k, d], V: [n_k, d_v] -> [n_q, d_v].
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads);
AttentionOutput attention_with_weights(const Tensor& q, const Tensor& k, const Tensor& v, int heads);

/// Attention where every (query, key) pair carries its own query/key/value
/// vectors. Qp, Kp: [n_q, n_k, d], Vp: [n_q, n_k, d_v] -> [n_q, d_v].
Tensor pairwise_attention(const Tensor& qp, const Tensor& kp, const Tensor& vp, int heads);
AttentionOutput pairwise_attention_with_weights(const Tensor& qp, const Tensor& kp, const Tensor& vp, int heads);

// Losses.
/// Mean smooth-L1 with transition at 1.
Tensor smooth_l1(const Tensor& pred, const Tensor& target);
/// scores: [N, K]. Mean over agents of the mean hinge over negatives,
/// max(0, s_k + margin - s_pos).
Tensor max_margin(const Tensor& scores, std::span<const std::int64_t> positives, double margin);

}  // namespace dgf
