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
#include "core/nn.hpp"

#include <cmath>

#include "core/error.hpp"

namespace dgf {

Tensor ParamStore::add(const std::string& name, Tensor t) {
  if (index_.count(name)) throw ContractError("duplicate parameter name: " + name);
  t.set_requires_grad(true);
  index_.emplace(name, params_.size());
  params_.push_back({name, t});
  return t;
}

Tensor ParamStore::uniform(const std::string& name, Shape shape, std::int64_t fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(std::max<std::int64_t>(fan_in, 1)));
  std::vector<double> v(static_cast<std::size_t>(numel_of(shape)));
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return add(name, Tensor::from(std::move(shape), std::move(v)));
}

Tensor ParamStore::constant(const std::string& name, Shape shape, double value) {
  return add(name, Tensor::full(std::move(shape), value));
}

Tensor ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? Tensor{} : params_[it->second].tensor;
}

std::int64_t ParamStore::count() const {
  std::int64_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

Linear::Linear(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t out, Rng& rng, bool with_bias) {
  weight = store.uniform(name + ".weight", {out, in}, in, rng);
  if (with_bias) bias = store.uniform(name + ".bias", {out}, in, rng);
}

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, std::int64_t width, int axis) : axis_(axis) {
  gamma = store.constant(name + ".weight", {width}, 1.0);
  beta = store.constant(name + ".bias", {width}, 0.0);
}

ConvNorm::ConvNorm(ParamStore& store, const std::string& name, std::int64_t c_in, std::int64_t c_out, int kernel,
                   int stride, bool act, Rng& rng)
    : stride_(stride), padding_((kernel - 1) / 2), act_(act) {
  weight = store.uniform(name + ".conv.weight", {c_out, c_in, kernel}, c_in * kernel, rng);
  bias = store.uniform(name + ".conv.bias", {c_out}, c_in * kernel, rng);
  norm = LayerNorm(store, name + ".norm", c_out, 1);
}

Tensor ConvNorm::operator()(const Tensor& x) const {
  Tensor y = norm(conv1d(x, weight, bias, stride_, padding_));
  return act_ ? relu(y) : y;
}

Res1d::Res1d(ParamStore& store, const std::string& name, std::int64_t c_in, std::int64_t c_out, int stride, Rng& rng)
    : conv1_(store, name + ".conv1", c_in, c_out, kKernel, stride, true, rng),
      conv2_(store, name + ".conv2", c_out, c_out, kKernel, 1, false, rng) {
  if (c_in != c_out || stride > 1) skip_.emplace(store, name + ".downsample", c_in, c_out, 1, stride, false, rng);
}

Tensor Res1d::operator()(const Tensor& x) const {
  if (x.ndim() != 3) throw DimensionError("Res1d: input must be [n, c, t], got " + shape_str(x.shape()));
  if (x.dim(2) < kKernel - 1) {
    throw DimensionError("Res1d: axis 2 (time) extent " + std::to_string(x.dim(2)) + " below receptive field");
  }
  Tensor y = conv2_(conv1_(x));
  Tensor s = skip_ ? (*skip_)(x) : x;
  return relu(add(y, s));
}

Mlp::Mlp(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t hidden, std::int64_t out,
         int hidden_layers, Rng& rng) {
  std::int64_t width = in;
  for (int i = 0; i < hidden_layers; ++i) {
    hidden_.emplace_back(store, name + ".fc" + std::to_string(i), width, hidden, rng);
    norms_.emplace_back(store, name + ".norm" + std::to_string(i), hidden);
    width = hidden;
  }
  out_ = Linear(store, name + ".out", width, out, rng);
}

Tensor Mlp::operator()(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < hidden_.size(); ++i) h = relu(norms_[i](hidden_[i](h)));
  return out_(h);
}

Tensor edge_attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& edge, const Linear& edge_q,
                      const Linear& edge_k, const Linear& edge_v, int heads) {
  if (q.ndim() != 2 || k.ndim() != 2 || v.ndim() != 2) throw DimensionError("edge_attention: Q, K, V must be rank 2");
  if (edge.ndim() != 3) throw DimensionError("edge_attention: edge must be [n_q, n_k, e]");
  const auto nq = q.dim(0), nk = k.dim(0), d = q.dim(1);
  if (edge.dim(0) != nq) throw DimensionError("edge_attention: axis 0 of edge must equal number of queries");
  if (edge.dim(1) != nk) throw DimensionError("edge_attention: axis 1 of edge must equal number of keys");
  if (k.dim(1) != d) throw DimensionError("edge_attention: axis 1 of K must equal axis 1 of Q");
  if (v.dim(0) != nk) throw DimensionError("edge_attention: axis 0 of V must equal axis 0 of K");
  if (nk == 0) throw EmptyContextError("edge_attention: context has no keys");
  const Shape pair{nq, nk, d};
  const Shape pair_v{nq, nk, v.dim(1)};
  Tensor qp = add(broadcast_to(reshape(q, {nq, 1, d}), pair), edge_q(edge));
  Tensor kp = add(broadcast_to(k, pair), edge_k(edge));
  Tensor vp = add(broadcast_to(v, pair_v), edge_v(edge));
  return pairwise_attention(qp, kp, vp, heads);
}

AttentionBlock::AttentionBlock(ParamStore& store, const std::string& name, std::int64_t width, int heads,
                               bool with_edges, Rng& rng)
    : heads_(heads), with_edges_(with_edges) {
  q = Linear(store, name + ".q", width, width, rng);
  k = Linear(store, name + ".k", width, width, rng);
  v = Linear(store, name + ".v", width, width, rng);
  out = Linear(store, name + ".out", width, width, rng);
  if (with_edges) {
    edge_q = Linear(store, name + ".edge_q", width, width, rng, false);
    edge_k = Linear(store, name + ".edge_k", width, width, rng, false);
    edge_v = Linear(store, name + ".edge_v", width, width, rng, false);
  }
  norm = LayerNorm(store, name + ".norm", width);
}

Tensor AttentionBlock::finish(const Tensor& x, const Tensor& attended, const ForwardContext& ctx) const {
  return norm(add(x, dropout(out(attended), ctx.dropout, ctx.training, ctx.rng)));
}

Tensor AttentionBlock::operator()(const Tensor& x, const Tensor& context, const ForwardContext& ctx) const {
  if (with_edges_) throw ContractError("AttentionBlock: edge block called without edge features");
  if (context.dim(0) == 0) return norm(x);
  return finish(x, attention(q(x), k(context), v(context), heads_), ctx);
}

Tensor AttentionBlock::operator()(const Tensor& x, const Tensor& context, const Tensor& edge,
                                  const ForwardContext& ctx) const {
  if (!with_edges_) throw ContractError("AttentionBlock: plain block called with edge features");
  if (context.dim(0) == 0) return norm(x);
  return finish(x, edge_attention(q(x), k(context), v(context), edge, edge_q, edge_k, edge_v, heads_), ctx);
}

}  // namespace dgf
