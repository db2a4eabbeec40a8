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
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/ops.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace dgf {

struct Parameter {
  std::string name;
  Tensor tensor;
};

/// Owns every learned tensor of a model under a unique dotted name.
class ParamStore {
 public:
  /// Uniform in +-sqrt(1/fan_in).
  Tensor uniform(const std::string& name, Shape shape, std::int64_t fan_in, Rng& rng);
  Tensor constant(const std::string& name, Shape shape, double value);

  const std::vector<Parameter>& parameters() const { return params_; }
  /// Undefined tensor when the name is unknown.
  Tensor find(const std::string& name) const;
  std::int64_t count() const;
  void zero_grad();

 private:
  Tensor add(const std::string& name, Tensor t);
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Per-forward switches. Dropout only fires when training and rng is set.
struct ForwardContext {
  bool training = false;
  double dropout = 0.1;
  Rng* rng = nullptr;
};

class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t out, Rng& rng, bool bias = true);
  Tensor operator()(const Tensor& x) const { return linear(x, weight, bias); }

  Tensor weight;  // [out, in]
  Tensor bias;    // [out] or undefined
};

/// Layer normalization over one axis with a learned affine map.
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, std::int64_t width, int axis = -1);
  Tensor operator()(const Tensor& x) const { return layer_norm(x, gamma, beta, axis_); }

  Tensor gamma, beta;

 private:
  int axis_ = -1;
};

/// conv -> channel norm, optionally followed by ReLU.
class ConvNorm {
 public:
  ConvNorm() = default;
  ConvNorm(ParamStore& store, const std::string& name, std::int64_t c_in, std::int64_t c_out, int kernel, int stride,
           bool act, Rng& rng);
  Tensor operator()(const Tensor& x) const;

  Tensor weight, bias;
  LayerNorm norm;

 private:
  int stride_ = 1, padding_ = 0;
  bool act_ = true;
};

/// Residual 1-D convolution block on [n, c, t]:
///   relu(norm(conv(relu(norm(conv(x))))) + skip(x))
/// where skip is a strided 1x1 conv + norm whenever c_in != c_out or stride > 1.
class Res1d {
 public:
  Res1d() = default;
  Res1d(ParamStore& store, const std::string& name, std::int64_t c_in, std::int64_t c_out, int stride, Rng& rng);
  Tensor operator()(const Tensor& x) const;

  static constexpr int kKernel = 3;

 private:
  ConvNorm conv1_, conv2_;
  std::optional<ConvNorm> skip_;
};

/// (Linear -> LayerNorm -> ReLU) x hidden_layers, then a plain Linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t hidden, std::int64_t out,
      int hidden_layers, Rng& rng);
  Tensor operator()(const Tensor& x) const;

 private:
  std::vector<Linear> hidden_;
  std::vector<LayerNorm> norms_;
  Linear out_;
};

/// Attention over already projected inputs where each (query, key) pair is
/// shifted by projected edge features: Q' = Q + edge Wq, K' = K + edge Wk,
/// V' = V + edge Wv. Q: [n_q, d], K, V: [n_k, d], edge: [n_q, n_k, e].
Tensor edge_attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& edge, const Linear& edge_q,
                      const Linear& edge_k, const Linear& edge_v, int heads);

/// layer_norm(x + dropout(MHA(x, context[, edge]))).
///
/// With an empty context the attention term is defined as zero, so the block
/// reduces to layer_norm(x).
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(ParamStore& store, const std::string& name, std::int64_t width, int heads, bool with_edges,
                 Rng& rng);

  Tensor operator()(const Tensor& x, const Tensor& context, const ForwardContext& ctx) const;
  Tensor operator()(const Tensor& x, const Tensor& context, const Tensor& edge, const ForwardContext& ctx) const;

  bool with_edges() const { return with_edges_; }
  int heads() const { return heads_; }

  Linear q, k, v, out;
  Linear edge_q, edge_k, edge_v;
  LayerNorm norm;

 private:
  Tensor finish(const Tensor& x, const Tensor& attended, const ForwardContext& ctx) const;
  int heads_ = 1;
  bool with_edges_ = false;
};

}  // namespace dgf
