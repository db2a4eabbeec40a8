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
#include "core/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "core/error.hpp"

namespace dgf {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const MatRM>;

using detail::Node;

std::span<double> pgrad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return {};
  return p.grad_buffer();
}

const std::vector<double>& pdata(Node& self, std::size_t i) { return self.parents[i]->data; }

int norm_axis(int axis, int ndim, const char* op) {
  const int a = axis < 0 ? axis + ndim : axis;
  if (a < 0 || a >= ndim) throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " out of range");
  return a;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return;
  if (a.ndim() != b.ndim()) {
    throw DimensionError(std::string(op) + ": rank mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  for (int i = 0; i < a.ndim(); ++i) {
    if (a.dim(i) != b.dim(i)) {
      throw DimensionError(std::string(op) + ": axis " + std::to_string(i) + " mismatch " + shape_str(a.shape()) +
                           " vs " + shape_str(b.shape()));
    }
  }
}

/// outer * length * inner decomposition around one axis.
struct AxisSplit {
  std::int64_t outer = 1, length = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, int axis) {
  AxisSplit r;
  for (int i = 0; i < axis; ++i) r.outer *= s[static_cast<std::size_t>(i)];
  r.length = s[static_cast<std::size_t>(axis)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

std::vector<std::int64_t> strides_of(const Shape& s) {
  std::vector<std::int64_t> st(s.size(), 1);
  for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i) {
    st[static_cast<std::size_t>(i)] = st[static_cast<std::size_t>(i) + 1] * s[static_cast<std::size_t>(i) + 1];
  }
  return st;
}

}  // namespace

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.values().begin(), a.values().end());
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      auto g = pgrad(self, p);
      if (g.empty()) continue;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.values().begin(), a.values().end());
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (auto g = pgrad(self, 0); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    if (auto g = pgrad(self, 1); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.values().begin(), a.values().end());
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& av = pdata(self, 0);
    const auto& bv2 = pdata(self, 1);
    if (auto g = pgrad(self, 0); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv2[i];
    if (auto g = pgrad(self, 1); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
  });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (auto& v : out) v *= factor;
  return Tensor::make_result(x.shape(), std::move(out), {x}, [factor](Node& self) {
    auto g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor::make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    auto g = pgrad(self, 0);
    const auto& xv = pdata(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0) g[i] += self.grad[i];
  });
}

Tensor broadcast_to(const Tensor& x, const Shape& shape) {
  const auto& xs = x.shape();
  if (xs.size() > shape.size()) {
    throw DimensionError("broadcast_to: cannot broadcast " + shape_str(xs) + " to " + shape_str(shape));
  }
  const std::size_t lead = shape.size() - xs.size();
  auto xst = strides_of(xs);
  std::vector<std::int64_t> src_stride(shape.size(), 0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto target = shape[lead + i];
    if (xs[i] == target) {
      src_stride[lead + i] = xst[i];
    } else if (xs[i] != 1) {
      throw DimensionError("broadcast_to: axis " + std::to_string(i) + " of " + shape_str(xs) +
                           " incompatible with " + shape_str(shape));
    }
  }
  const auto n = numel_of(shape);
  // Precomputed source offsets; the same map drives the backward scatter.
  auto offsets = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(n));
  auto ost = strides_of(shape);
  for (std::int64_t o = 0; o < n; ++o) {
    std::int64_t rem = o, src = 0;
    for (std::size_t d = 0; d < shape.size(); ++d) {
      const auto idx = rem / ost[d];
      rem -= idx * ost[d];
      src += idx * src_stride[d];
    }
    (*offsets)[static_cast<std::size_t>(o)] = src;
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  auto xv = x.values();
  for (std::size_t o = 0; o < out.size(); ++o) out[o] = xv[static_cast<std::size_t>((*offsets)[o])];
  return Tensor::make_result(shape, std::move(out), {x}, [offsets](Node& self) {
    auto g = pgrad(self, 0);
    for (std::size_t o = 0; o < self.grad.size(); ++o) g[static_cast<std::size_t>((*offsets)[o])] += self.grad[o];
  });
}

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel_of(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return Tensor::make_result(std::move(shape), std::move(out), {x}, [](Node& self) {
    auto g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor transpose(const Tensor& x, int axis_a, int axis_b) {
  const int nd = x.ndim();
  const int a = norm_axis(axis_a, nd, "transpose");
  const int b = norm_axis(axis_b, nd, "transpose");
  Shape out_shape = x.shape();
  std::swap(out_shape[static_cast<std::size_t>(a)], out_shape[static_cast<std::size_t>(b)]);
  auto in_st = strides_of(x.shape());
  std::swap(in_st[static_cast<std::size_t>(a)], in_st[static_cast<std::size_t>(b)]);
  auto out_st = strides_of(out_shape);
  const auto n = x.numel();
  auto src = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(n));
  for (std::int64_t o = 0; o < n; ++o) {
    std::int64_t rem = o, s = 0;
    for (std::size_t d = 0; d < out_shape.size(); ++d) {
      const auto idx = rem / out_st[d];
      rem -= idx * out_st[d];
      s += idx * in_st[d];
    }
    (*src)[static_cast<std::size_t>(o)] = s;
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  auto xv = x.values();
  for (std::size_t o = 0; o < out.size(); ++o) out[o] = xv[static_cast<std::size_t>((*src)[o])];
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, [src](Node& self) {
    auto g = pgrad(self, 0);
    for (std::size_t o = 0; o < self.grad.size(); ++o) g[static_cast<std::size_t>((*src)[o])] += self.grad[o];
  });
}

Tensor concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  const int nd = parts[0].ndim();
  const int ax = norm_axis(axis, nd, "concat");
  Shape out_shape = parts[0].shape();
  out_shape[static_cast<std::size_t>(ax)] = 0;
  for (const auto& p : parts) {
    if (p.ndim() != nd) throw DimensionError("concat: rank mismatch " + shape_str(p.shape()));
    for (int d = 0; d < nd; ++d) {
      if (d != ax && p.dim(d) != parts[0].dim(d)) {
        throw DimensionError("concat: axis " + std::to_string(d) + " mismatch " + shape_str(p.shape()) + " vs " +
                             shape_str(parts[0].shape()));
      }
    }
    out_shape[static_cast<std::size_t>(ax)] += p.dim(ax);
  }
  const auto split = split_at(out_shape, ax);
  std::vector<double> out(static_cast<std::size_t>(numel_of(out_shape)));
  auto chunks = std::make_shared<std::vector<std::int64_t>>();  // per-part chunk width (length*inner)
  std::int64_t offset = 0;
  const std::int64_t row = split.length * split.inner;
  for (const auto& p : parts) {
    const std::int64_t w = p.dim(ax) * split.inner;
    auto pv = p.values();
    for (std::int64_t o = 0; o < split.outer; ++o) {
      std::copy_n(pv.begin() + o * w, w, out.begin() + o * row + offset);
    }
    chunks->push_back(w);
    offset += w;
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return Tensor::make_result(out_shape, std::move(out), std::move(parents), [chunks, split, row](Node& self) {
    std::int64_t off = 0;
    for (std::size_t p = 0; p < chunks->size(); ++p) {
      const auto w = (*chunks)[p];
      if (auto g = pgrad(self, p); !g.empty()) {
        for (std::int64_t o = 0; o < split.outer; ++o)
          for (std::int64_t i = 0; i < w; ++i) g[static_cast<std::size_t>(o * w + i)] += self.grad[static_cast<std::size_t>(o * row + off + i)];
      }
      off += w;
    }
  });
}

Tensor concat(std::initializer_list<Tensor> parts, int axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice(const Tensor& x, int axis, std::int64_t start, std::int64_t length) {
  const int ax = norm_axis(axis, x.ndim(), "slice");
  const auto split = split_at(x.shape(), ax);
  if (start < 0 || length < 0 || start + length > split.length) {
    throw DimensionError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") out of axis " + std::to_string(axis) + " of " + shape_str(x.shape()));
  }
  Shape out_shape = x.shape();
  out_shape[static_cast<std::size_t>(ax)] = length;
  const std::int64_t w = length * split.inner;
  const std::int64_t row = split.length * split.inner;
  const std::int64_t off = start * split.inner;
  std::vector<double> out(static_cast<std::size_t>(split.outer * w));
  auto xv = x.values();
  for (std::int64_t o = 0; o < split.outer; ++o) std::copy_n(xv.begin() + o * row + off, w, out.begin() + o * w);
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, [split, w, row, off](Node& self) {
    auto g = pgrad(self, 0);
    for (std::int64_t o = 0; o < split.outer; ++o)
      for (std::int64_t i = 0; i < w; ++i) g[static_cast<std::size_t>(o * row + off + i)] += self.grad[static_cast<std::size_t>(o * w + i)];
  });
}

Tensor index_select(const Tensor& x, int axis, std::span<const std::int64_t> indices) {
  const int ax = norm_axis(axis, x.ndim(), "index_select");
  const auto split = split_at(x.shape(), ax);
  for (auto i : indices) {
    if (i < 0 || i >= split.length) throw DimensionError("index_select: index " + std::to_string(i) + " out of range");
  }
  Shape out_shape = x.shape();
  out_shape[static_cast<std::size_t>(ax)] = static_cast<std::int64_t>(indices.size());
  auto idx = std::make_shared<std::vector<std::int64_t>>(indices.begin(), indices.end());
  const auto m = static_cast<std::int64_t>(idx->size());
  std::vector<double> out(static_cast<std::size_t>(split.outer * m * split.inner));
  auto xv = x.values();
  for (std::int64_t o = 0; o < split.outer; ++o)
    for (std::int64_t j = 0; j < m; ++j)
      std::copy_n(xv.begin() + (o * split.length + (*idx)[static_cast<std::size_t>(j)]) * split.inner, split.inner,
                  out.begin() + (o * m + j) * split.inner);
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, [idx, split, m](Node& self) {
    auto g = pgrad(self, 0);
    for (std::int64_t o = 0; o < split.outer; ++o)
      for (std::int64_t j = 0; j < m; ++j) {
        const auto src = (o * split.length + (*idx)[static_cast<std::size_t>(j)]) * split.inner;
        const auto dst = (o * m + j) * split.inner;
        for (std::int64_t i = 0; i < split.inner; ++i) g[static_cast<std::size_t>(src + i)] += self.grad[static_cast<std::size_t>(dst + i)];
      }
  });
}

Tensor gather_modes(const Tensor& x, std::span<const std::int64_t> indices) {
  if (x.ndim() < 2) throw DimensionError("gather_modes: need rank >= 2, got " + shape_str(x.shape()));
  const auto n = x.dim(0);
  const auto k = x.dim(1);
  if (static_cast<std::int64_t>(indices.size()) != n) {
    throw DimensionError("gather_modes: " + std::to_string(indices.size()) + " indices for axis 0 of extent " +
                         std::to_string(n));
  }
  const auto inner = k == 0 ? 0 : x.numel() / (n * k);
  Shape out_shape(x.shape().begin() + 2, x.shape().end());
  out_shape.insert(out_shape.begin(), n);
  auto idx = std::make_shared<std::vector<std::int64_t>>(indices.begin(), indices.end());
  std::vector<double> out(static_cast<std::size_t>(n * inner));
  auto xv = x.values();
  for (std::int64_t r = 0; r < n; ++r) {
    const auto m = (*idx)[static_cast<std::size_t>(r)];
    if (m < 0 || m >= k) throw DimensionError("gather_modes: mode index " + std::to_string(m) + " out of range");
    std::copy_n(xv.begin() + (r * k + m) * inner, inner, out.begin() + r * inner);
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, [idx, n, k, inner](Node& self) {
    auto g = pgrad(self, 0);
    for (std::int64_t r = 0; r < n; ++r) {
      const auto src = (r * k + (*idx)[static_cast<std::size_t>(r)]) * inner;
      for (std::int64_t i = 0; i < inner; ++i) g[static_cast<std::size_t>(src + i)] += self.grad[static_cast<std::size_t>(r * inner + i)];
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return Tensor::make_result({}, {s}, {x}, [](Node& self) {
    auto g = pgrad(self, 0);
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw ContractError("mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor max_over(const Tensor& x, int axis) {
  const int ax = norm_axis(axis, x.ndim(), "max_over");
  const auto split = split_at(x.shape(), ax);
  if (split.length == 0) throw DimensionError("max_over: empty axis");
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + ax);
  std::vector<double> out(static_cast<std::size_t>(split.outer * split.inner));
  auto arg = std::make_shared<std::vector<std::int64_t>>(out.size());
  auto xv = x.values();
  for (std::int64_t o = 0; o < split.outer; ++o)
    for (std::int64_t i = 0; i < split.inner; ++i) {
      std::int64_t best = o * split.length * split.inner + i;
      for (std::int64_t j = 1; j < split.length; ++j) {
        const auto at = (o * split.length + j) * split.inner + i;
        if (xv[static_cast<std::size_t>(at)] > xv[static_cast<std::size_t>(best)]) best = at;
      }
      const auto dst = static_cast<std::size_t>(o * split.inner + i);
      out[dst] = xv[static_cast<std::size_t>(best)];
      (*arg)[dst] = best;
    }
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, [arg](Node& self) {
    auto g = pgrad(self, 0);
    for (std::size_t o = 0; o < arg->size(); ++o) g[static_cast<std::size_t>((*arg)[o])] += self.grad[o];
  });
}

// ---------------------------------------------------------------------------
// Dense layers
// ---------------------------------------------------------------------------

namespace {

/// Copies into Eigen-owned, aligned storage.
MatRM owned(std::span<const double> v, Eigen::Index rows, Eigen::Index cols) { return MapC(v.data(), rows, cols); }

void add_into(std::span<double> dst, const MatRM& m) {
  const double* src = m.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

std::vector<double> to_vector(const MatRM& m) { return {m.data(), m.data() + m.size()}; }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2) throw DimensionError("matmul: expects rank-2 operands");
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: inner axis mismatch " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  MatRM y = owned(a.values(), m, k) * owned(b.values(), k, n);
  return Tensor::make_result({m, n}, to_vector(y), {a, b}, [m, k, n](Node& self) {
    const MatRM g = owned(self.grad, m, n);
    if (auto ga = pgrad(self, 0); !ga.empty()) add_into(ga, g * owned(pdata(self, 1), k, n).transpose());
    if (auto gb = pgrad(self, 1); !gb.empty()) add_into(gb, owned(pdata(self, 0), m, k).transpose() * g);
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (weight.ndim() != 2) throw DimensionError("linear: weight must be [out, in]");
  const auto in = weight.dim(1), out_f = weight.dim(0);
  if (x.ndim() < 1 || x.dim(-1) != in) {
    throw DimensionError("linear: last axis of input " + shape_str(x.shape()) + " must equal " + std::to_string(in));
  }
  if (bias.defined() && (bias.ndim() != 1 || bias.dim(0) != out_f)) {
    throw DimensionError("linear: bias must be [" + std::to_string(out_f) + "]");
  }
  const auto rows = in == 0 ? 0 : x.numel() / in;
  Shape out_shape = x.shape();
  out_shape.back() = out_f;
  MatRM y = owned(x.values(), rows, in) * owned(weight.values(), out_f, in).transpose();
  if (bias.defined()) y.rowwise() += Eigen::RowVectorXd(owned(bias.values(), 1, out_f));
  std::vector<Tensor> parents{x, weight};
  if (bias.defined()) parents.push_back(bias);
  const bool has_bias = bias.defined();
  return Tensor::make_result(std::move(out_shape), to_vector(y), std::move(parents),
                             [rows, in, out_f, has_bias](Node& self) {
                               const MatRM g = owned(self.grad, rows, out_f);
                               if (auto gx = pgrad(self, 0); !gx.empty())
                                 add_into(gx, g * owned(pdata(self, 1), out_f, in));
                               if (auto gw = pgrad(self, 1); !gw.empty())
                                 add_into(gw, g.transpose() * owned(pdata(self, 0), rows, in));
                               if (has_bias) {
                                 if (auto gb = pgrad(self, 2); !gb.empty()) add_into(gb, g.colwise().sum());
                               }
                             });
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding) {
  if (x.ndim() != 3) throw DimensionError("conv1d: input must be [n, c_in, t], got " + shape_str(x.shape()));
  if (weight.ndim() != 3) throw DimensionError("conv1d: weight must be [c_out, c_in, k]");
  if (stride < 1 || padding < 0) throw ContractError("conv1d: stride must be >= 1 and padding >= 0");
  const auto n = x.dim(0), cin = x.dim(1), t = x.dim(2);
  const auto cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin) {
    throw DimensionError("conv1d: axis 1 (channels) of input is " + std::to_string(cin) + ", weight expects " +
                         std::to_string(weight.dim(1)));
  }
  if (t + 2 * padding < k) {
    throw DimensionError("conv1d: axis 2 (time) extent " + std::to_string(t) + " shorter than kernel " +
                         std::to_string(k));
  }
  const auto tout = (t + 2 * padding - k) / stride + 1;
  const auto rows = n * tout, width = cin * k;
  auto cols = std::make_shared<MatRM>(MatRM::Zero(rows, width));
  auto xv = x.values();
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t to = 0; to < tout; ++to) {
      double* row = cols->data() + (b * tout + to) * width;
      for (std::int64_t c = 0; c < cin; ++c)
        for (std::int64_t kk = 0; kk < k; ++kk) {
          const auto ti = to * stride - padding + kk;
          if (ti >= 0 && ti < t) row[c * k + kk] = xv[static_cast<std::size_t>((b * cin + c) * t + ti)];
        }
    }
  MatRM y = *cols * owned(weight.values(), cout, width).transpose();
  std::vector<double> out(static_cast<std::size_t>(n * cout * tout));
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t co = 0; co < cout; ++co) {
      const double bv = bias.defined() ? bias.values()[static_cast<std::size_t>(co)] : 0.0;
      for (std::int64_t to = 0; to < tout; ++to) out[static_cast<std::size_t>((b * cout + co) * tout + to)] = y(b * tout + to, co) + bv;
    }
  std::vector<Tensor> parents{x, weight};
  if (bias.defined()) parents.push_back(bias);
  const bool has_bias = bias.defined();
  return Tensor::make_result({n, cout, tout}, std::move(out), std::move(parents),
                             [=](Node& self) {
                               MatRM g(rows, cout);
                               for (std::int64_t b = 0; b < n; ++b)
                                 for (std::int64_t co = 0; co < cout; ++co)
                                   for (std::int64_t to = 0; to < tout; ++to)
                                     g(b * tout + to, co) = self.grad[static_cast<std::size_t>((b * cout + co) * tout + to)];
                               if (auto gw = pgrad(self, 1); !gw.empty()) add_into(gw, g.transpose() * *cols);
                               if (has_bias) {
                                 if (auto gb = pgrad(self, 2); !gb.empty()) add_into(gb, g.colwise().sum());
                               }
                               if (auto gx = pgrad(self, 0); !gx.empty()) {
                                 MatRM gc = g * owned(pdata(self, 1), cout, width);
                                 for (std::int64_t b = 0; b < n; ++b)
                                   for (std::int64_t to = 0; to < tout; ++to)
                                     for (std::int64_t c = 0; c < cin; ++c)
                                       for (std::int64_t kk = 0; kk < k; ++kk) {
                                         const auto ti = to * stride - padding + kk;
                                         if (ti >= 0 && ti < t)
                                           gx[static_cast<std::size_t>((b * cin + c) * t + ti)] += gc(b * tout + to, c * k + kk);
                                       }
                               }
                             });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, int axis, double eps) {
  const int ax = norm_axis(axis, x.ndim(), "layer_norm");
  const auto split = split_at(x.shape(), ax);
  const auto len = split.length;
  if (gamma.defined() && gamma.numel() != len) throw DimensionError("layer_norm: gamma extent mismatch");
  if (beta.defined() && beta.numel() != len) throw DimensionError("layer_norm: beta extent mismatch");
  const auto groups = split.outer * split.inner;
  auto xhat = std::make_shared<std::vector<double>>(static_cast<std::size_t>(x.numel()));
  auto rstd = std::make_shared<std::vector<double>>(static_cast<std::size_t>(groups));
  std::vector<double> out(static_cast<std::size_t>(x.numel()));
  auto xv = x.values();
  const double* gv = gamma.defined() ? gamma.values().data() : nullptr;
  const double* bv = beta.defined() ? beta.values().data() : nullptr;
  const auto inner = split.inner;
  auto at = [len, inner](std::int64_t o, std::int64_t i, std::int64_t j) {
    return static_cast<std::size_t>((o * len + j) * inner + i);
  };
  for (std::int64_t o = 0; o < split.outer; ++o)
    for (std::int64_t i = 0; i < inner; ++i) {
      double mu = 0.0;
      for (std::int64_t j = 0; j < len; ++j) mu += xv[at(o, i, j)];
      mu /= static_cast<double>(len);
      double var = 0.0;
      for (std::int64_t j = 0; j < len; ++j) {
        const double d = xv[at(o, i, j)] - mu;
        var += d * d;
      }
      var /= static_cast<double>(len);
      const double r = 1.0 / std::sqrt(var + eps);
      (*rstd)[static_cast<std::size_t>(o * inner + i)] = r;
      for (std::int64_t j = 0; j < len; ++j) {
        const auto p = at(o, i, j);
        const double h = (xv[p] - mu) * r;
        (*xhat)[p] = h;
        out[p] = h * (gv ? gv[j] : 1.0) + (bv ? bv[j] : 0.0);
      }
    }
  std::vector<Tensor> parents{x, gamma, beta};
  return Tensor::make_result(x.shape(), std::move(out), std::move(parents), [=](Node& self) {
    const bool has_g = self.parents[1] != nullptr;
    const bool has_b = self.parents[2] != nullptr;
    std::span<double> gx = pgrad(self, 0);
    std::span<double> gg = has_g ? pgrad(self, 1) : std::span<double>{};
    std::span<double> gb = has_b ? pgrad(self, 2) : std::span<double>{};
    const double* gam = has_g ? pdata(self, 1).data() : nullptr;
    std::vector<double> gh(static_cast<std::size_t>(len));
    for (std::int64_t o = 0; o < split.outer; ++o)
      for (std::int64_t i = 0; i < inner; ++i) {
        double m1 = 0.0, m2 = 0.0;
        for (std::int64_t j = 0; j < len; ++j) {
          const auto p = at(o, i, j);
          const double g = self.grad[p];
          if (!gg.empty()) gg[static_cast<std::size_t>(j)] += g * (*xhat)[p];
          if (!gb.empty()) gb[static_cast<std::size_t>(j)] += g;
          gh[static_cast<std::size_t>(j)] = g * (gam ? gam[j] : 1.0);
          m1 += gh[static_cast<std::size_t>(j)];
          m2 += gh[static_cast<std::size_t>(j)] * (*xhat)[p];
        }
        if (gx.empty()) continue;
        m1 /= static_cast<double>(len);
        m2 /= static_cast<double>(len);
        const double r = (*rstd)[static_cast<std::size_t>(o * inner + i)];
        for (std::int64_t j = 0; j < len; ++j) {
          const auto p = at(o, i, j);
          gx[p] += r * (gh[static_cast<std::size_t>(j)] - m1 - (*xhat)[p] * m2);
        }
      }
  });
}

Tensor softmax(const Tensor& x) {
  if (x.ndim() < 1) throw DimensionError("softmax: needs rank >= 1");
  const auto len = x.dim(-1);
  if (len == 0) throw DimensionError("softmax: empty last axis");
  const auto rows = x.numel() / len;
  std::vector<double> out(x.values().begin(), x.values().end());
  for (std::int64_t r = 0; r < rows; ++r) {
    double* v = out.data() + r * len;
    const double mx = *std::max_element(v, v + len);
    double s = 0.0;
    for (std::int64_t j = 0; j < len; ++j) s += (v[j] = std::exp(v[j] - mx));
    for (std::int64_t j = 0; j < len; ++j) v[j] /= s;
  }
  return Tensor::make_result(x.shape(), std::move(out), {x}, [rows, len](Node& self) {
    auto g = pgrad(self, 0);
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* y = self.data.data() + r * len;
      const double* go = self.grad.data() + r * len;
      double dot = 0.0;
      for (std::int64_t j = 0; j < len; ++j) dot += go[j] * y[j];
      for (std::int64_t j = 0; j < len; ++j) g[static_cast<std::size_t>(r * len + j)] += y[j] * (go[j] - dot);
    }
  });
}

Tensor upsample2(const Tensor& x) {
  if (x.ndim() != 3) throw DimensionError("upsample2: input must be [n, c, t], got " + shape_str(x.shape()));
  const auto t = x.dim(2);
  if (t < 1) throw DimensionError("upsample2: axis 2 (time) must be >= 1");
  const auto rows = x.dim(0) * x.dim(1);
  const auto t2 = 2 * t;
  // Corner alignment: output sample p sits at source coordinate p * (t-1)/(2t-1).
  auto lo = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(t2));
  auto frac = std::make_shared<std::vector<double>>(static_cast<std::size_t>(t2));
  for (std::int64_t p = 0; p < t2; ++p) {
    const double src = t == 1 ? 0.0 : static_cast<double>(p) * static_cast<double>(t - 1) / static_cast<double>(t2 - 1);
    auto i0 = static_cast<std::int64_t>(std::floor(src));
    if (i0 >= t - 1) i0 = std::max<std::int64_t>(t - 2, 0);
    (*lo)[static_cast<std::size_t>(p)] = i0;
    (*frac)[static_cast<std::size_t>(p)] = t == 1 ? 0.0 : src - static_cast<double>(i0);
  }
  std::vector<double> out(static_cast<std::size_t>(rows * t2));
  auto xv = x.values();
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t p = 0; p < t2; ++p) {
      const auto i0 = (*lo)[static_cast<std::size_t>(p)];
      const double f = (*frac)[static_cast<std::size_t>(p)];
      const double a = xv[static_cast<std::size_t>(r * t + i0)];
      const double b = t == 1 ? a : xv[static_cast<std::size_t>(r * t + i0 + 1)];
      out[static_cast<std::size_t>(r * t2 + p)] = f == 0.0 ? a : a + f * (b - a);
    }
  return Tensor::make_result({x.dim(0), x.dim(1), t2}, std::move(out), {x}, [=](Node& self) {
    auto g = pgrad(self, 0);
    for (std::int64_t r = 0; r < rows; ++r)
      for (std::int64_t p = 0; p < t2; ++p) {
        const auto i0 = (*lo)[static_cast<std::size_t>(p)];
        const double f = (*frac)[static_cast<std::size_t>(p)];
        const double go = self.grad[static_cast<std::size_t>(r * t2 + p)];
        g[static_cast<std::size_t>(r * t + i0)] += (1.0 - f) * go;
        if (t > 1) g[static_cast<std::size_t>(r * t + i0 + 1)] += f * go;
      }
  });
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0) throw ContractError("dropout: rate must be in [0, 1)");
  if (!training || rate == 0.0) return x;
  if (rng == nullptr) throw ContractError("dropout: training mode needs an rng");
  const double keep = 1.0 - rate;
  auto mask = std::make_shared<std::vector<double>>(static_cast<std::size_t>(x.numel()));
  for (auto& m : *mask) m = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
  std::vector<double> out(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*mask)[i];
  return Tensor::make_result(x.shape(), std::move(out), {x}, [mask](Node& self) {
    auto g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += (*mask)[i] * self.grad[i];
  });
}

Tensor rotate2d(const Tensor& x, std::span<const double> angles) {
  if (x.ndim() < 2 || x.dim(-1) != 2) throw DimensionError("rotate2d: input must be [N, ..., 2]");
  const auto n = x.dim(0);
  if (static_cast<std::int64_t>(angles.size()) != n) throw DimensionError("rotate2d: one angle per row required");
  const auto per_row = x.numel() / (2 * std::max<std::int64_t>(n, 1));
  auto cs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(2 * n));
  for (std::int64_t r = 0; r < n; ++r) {
    (*cs)[static_cast<std::size_t>(2 * r)] = std::cos(angles[static_cast<std::size_t>(r)]);
    (*cs)[static_cast<std::size_t>(2 * r + 1)] = std::sin(angles[static_cast<std::size_t>(r)]);
  }
  std::vector<double> out(static_cast<std::size_t>(x.numel()));
  auto xv = x.values();
  for (std::int64_t r = 0; r < n; ++r) {
    const double c = (*cs)[static_cast<std::size_t>(2 * r)], s = (*cs)[static_cast<std::size_t>(2 * r + 1)];
    for (std::int64_t p = 0; p < per_row; ++p) {
      const auto i = static_cast<std::size_t>((r * per_row + p) * 2);
      out[i] = c * xv[i] - s * xv[i + 1];
      out[i + 1] = s * xv[i] + c * xv[i + 1];
    }
  }
  return Tensor::make_result(x.shape(), std::move(out), {x}, [cs, n, per_row](Node& self) {
    auto g = pgrad(self, 0);
    for (std::int64_t r = 0; r < n; ++r) {
      const double c = (*cs)[static_cast<std::size_t>(2 * r)], s = (*cs)[static_cast<std::size_t>(2 * r + 1)];
      for (std::int64_t p = 0; p < per_row; ++p) {
        const auto i = static_cast<std::size_t>((r * per_row + p) * 2);
        g[i] += c * self.grad[i] + s * self.grad[i + 1];
        g[i + 1] += -s * self.grad[i] + c * self.grad[i + 1];
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Attention
// ---------------------------------------------------------------------------

namespace {

/// Offsets of the query/key/value vectors for pair (i, j). Plain attention
/// shares Q rows across keys and K/V rows across queries; pairwise attention
/// gives every pair its own vectors. Both go through one kernel so that equal
/// inputs produce bit-identical outputs.
struct PairLayout {
  std::int64_t nq, nk, d, dv, heads;
  bool per_pair;
  std::int64_t q(std::int64_t i, std::int64_t j) const { return per_pair ? (i * nk + j) * d : i * d; }
  std::int64_t k(std::int64_t i, std::int64_t j) const { return per_pair ? (i * nk + j) * d : j * d; }
  std::int64_t v(std::int64_t i, std::int64_t j) const { return per_pair ? (i * nk + j) * dv : j * dv; }
};

AttentionOutput attention_kernel(const Tensor& q, const Tensor& k, const Tensor& v, const PairLayout L) {
  const std::int64_t dh = L.d / L.heads, dvh = L.dv / L.heads;
  const double scale_f = 1.0 / std::sqrt(static_cast<double>(dh));
  auto w = std::make_shared<std::vector<double>>(static_cast<std::size_t>(L.nq * L.heads * L.nk));
  std::vector<double> out(static_cast<std::size_t>(L.nq * L.dv), 0.0);
  const double* qv = q.values().data();
  const double* kv = k.values().data();
  const double* vv = v.values().data();
  for (std::int64_t i = 0; i < L.nq; ++i)
    for (std::int64_t h = 0; h < L.heads; ++h) {
      double* wr = w->data() + (i * L.heads + h) * L.nk;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::int64_t j = 0; j < L.nk; ++j) {
        const double* qp = qv + L.q(i, j) + h * dh;
        const double* kp = kv + L.k(i, j) + h * dh;
        double s = 0.0;
        for (std::int64_t c = 0; c < dh; ++c) s += qp[c] * kp[c];
        wr[j] = s * scale_f;
        mx = std::max(mx, wr[j]);
      }
      double z = 0.0;
      for (std::int64_t j = 0; j < L.nk; ++j) z += (wr[j] = std::exp(wr[j] - mx));
      for (std::int64_t j = 0; j < L.nk; ++j) wr[j] /= z;
      double* o = out.data() + i * L.dv + h * dvh;
      for (std::int64_t j = 0; j < L.nk; ++j) {
        const double* vp = vv + L.v(i, j) + h * dvh;
        for (std::int64_t c = 0; c < dvh; ++c) o[c] += wr[j] * vp[c];
      }
    }
  AttentionOutput result;
  result.weights = *w;
  result.output = Tensor::make_result({L.nq, L.dv}, std::move(out), {q, k, v}, [w, L, dh, dvh, scale_f](Node& self) {
    const double* qv2 = self.parents[0]->data.data();
    const double* kv2 = self.parents[1]->data.data();
    const double* vv2 = self.parents[2]->data.data();
    auto gq = pgrad(self, 0);
    auto gk = pgrad(self, 1);
    auto gv = pgrad(self, 2);
    std::vector<double> dw(static_cast<std::size_t>(L.nk));
    for (std::int64_t i = 0; i < L.nq; ++i)
      for (std::int64_t h = 0; h < L.heads; ++h) {
        const double* wr = w->data() + (i * L.heads + h) * L.nk;
        const double* go = self.grad.data() + i * L.dv + h * dvh;
        double dot = 0.0;
        for (std::int64_t j = 0; j < L.nk; ++j) {
          const auto vo = L.v(i, j) + h * dvh;
          double s = 0.0;
          for (std::int64_t c = 0; c < dvh; ++c) {
            s += go[c] * vv2[vo + c];
            if (!gv.empty()) gv[static_cast<std::size_t>(vo + c)] += wr[j] * go[c];
          }
          dw[static_cast<std::size_t>(j)] = s;
          dot += wr[j] * s;
        }
        for (std::int64_t j = 0; j < L.nk; ++j) {
          const double ds = wr[j] * (dw[static_cast<std::size_t>(j)] - dot) * scale_f;
          const auto qo = L.q(i, j) + h * dh;
          const auto ko = L.k(i, j) + h * dh;
          for (std::int64_t c = 0; c < dh; ++c) {
            if (!gq.empty()) gq[static_cast<std::size_t>(qo + c)] += ds * kv2[ko + c];
            if (!gk.empty()) gk[static_cast<std::size_t>(ko + c)] += ds * qv2[qo + c];
          }
        }
      }
  });
  return result;
}

void check_heads(std::int64_t d, std::int64_t dv, int heads) {
  if (heads < 1) throw ContractError("attention: heads must be positive");
  if (d % heads != 0) {
    throw DimensionError("attention: query/key width (axis -1) " + std::to_string(d) + " not divisible by " +
                         std::to_string(heads) + " heads");
  }
  if (dv % heads != 0) {
    throw DimensionError("attention: value width (axis -1) " + std::to_string(dv) + " not divisible by " +
                         std::to_string(heads) + " heads");
  }
}

}  // namespace

AttentionOutput attention_with_weights(const Tensor& q, const Tensor& k, const Tensor& v, int heads) {
  if (q.ndim() != 2 || k.ndim() != 2 || v.ndim() != 2) throw DimensionError("attention: Q, K, V must be rank 2");
  if (k.dim(1) != q.dim(1)) {
    throw DimensionError("attention: axis 1 of K (" + std::to_string(k.dim(1)) + ") must equal axis 1 of Q (" +
                         std::to_string(q.dim(1)) + ")");
  }
  if (v.dim(0) != k.dim(0)) {
    throw DimensionError("attention: axis 0 of V (" + std::to_string(v.dim(0)) + ") must equal axis 0 of K (" +
                         std::to_string(k.dim(0)) + ")");
  }
  if (k.dim(0) == 0) throw EmptyContextError("attention: context has no keys");
  check_heads(q.dim(1), v.dim(1), heads);
  return attention_kernel(q, k, v, PairLayout{q.dim(0), k.dim(0), q.dim(1), v.dim(1), heads, false});
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads) {
  return attention_with_weights(q, k, v, heads).output;
}

AttentionOutput pairwise_attention_with_weights(const Tensor& qp, const Tensor& kp, const Tensor& vp, int heads) {
  if (qp.ndim() != 3 || kp.ndim() != 3 || vp.ndim() != 3) {
    throw DimensionError("pairwise_attention: Q', K', V' must be [n_q, n_k, d]");
  }
  for (int a = 0; a < 2; ++a) {
    if (kp.dim(a) != qp.dim(a) || vp.dim(a) != qp.dim(a)) {
      throw DimensionError("pairwise_attention: axis " + std::to_string(a) + " mismatch between Q', K', V'");
    }
  }
  if (kp.dim(2) != qp.dim(2)) throw DimensionError("pairwise_attention: axis 2 of K' must equal axis 2 of Q'");
  if (qp.dim(1) == 0) throw EmptyContextError("pairwise_attention: context has no keys");
  check_heads(qp.dim(2), vp.dim(2), heads);
  return attention_kernel(qp, kp, vp, PairLayout{qp.dim(0), qp.dim(1), qp.dim(2), vp.dim(2), heads, true});
}

Tensor pairwise_attention(const Tensor& qp, const Tensor& kp, const Tensor& vp, int heads) {
  return pairwise_attention_with_weights(qp, kp, vp, heads).output;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

Tensor smooth_l1(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "smooth_l1");
  if (pred.numel() == 0) throw ContractError("smooth_l1: empty input");
  auto pv = pred.values();
  auto tv = target.values();
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double r = std::abs(pv[i] - tv[i]);
    s += r < 1.0 ? 0.5 * r * r : r - 0.5;
  }
  const double n = static_cast<double>(pv.size());
  return Tensor::make_result({}, {s / n}, {pred, target}, [n](Node& self) {
    const auto& p = pdata(self, 0);
    const auto& t = pdata(self, 1);
    const double go = self.grad[0] / n;
    auto gp = pgrad(self, 0);
    auto gt = pgrad(self, 1);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double r = p[i] - t[i];
      const double d = std::abs(r) < 1.0 ? r : (r > 0.0 ? 1.0 : -1.0);
      if (!gp.empty()) gp[i] += go * d;
      if (!gt.empty()) gt[i] -= go * d;
    }
  });
}

Tensor max_margin(const Tensor& scores, std::span<const std::int64_t> positives, double margin) {
  if (scores.ndim() != 2) throw DimensionError("max_margin: scores must be [N, K]");
  const auto n = scores.dim(0), k = scores.dim(1);
  if (k < 2) throw ContractError("max_margin: need K >= 2");
  if (n == 0) throw ContractError("max_margin: no agents");
  if (static_cast<std::int64_t>(positives.size()) != n) throw DimensionError("max_margin: one positive per agent");
  auto pos = std::make_shared<std::vector<std::int64_t>>(positives.begin(), positives.end());
  auto sv = scores.values();
  double total = 0.0;
  for (std::int64_t r = 0; r < n; ++r) {
    const auto p = (*pos)[static_cast<std::size_t>(r)];
    if (p < 0 || p >= k) throw DimensionError("max_margin: positive index out of range");
    const double sp = sv[static_cast<std::size_t>(r * k + p)];
    for (std::int64_t j = 0; j < k; ++j) {
      if (j == p) continue;
      total += std::max(0.0, sv[static_cast<std::size_t>(r * k + j)] + margin - sp);
    }
  }
  const double denom = static_cast<double>(n * (k - 1));
  return Tensor::make_result({}, {total / denom}, {scores}, [pos, n, k, margin, denom](Node& self) {
    auto g = pgrad(self, 0);
    const auto& s = pdata(self, 0);
    const double go = self.grad[0] / denom;
    for (std::int64_t r = 0; r < n; ++r) {
      const auto p = (*pos)[static_cast<std::size_t>(r)];
      const double sp = s[static_cast<std::size_t>(r * k + p)];
      for (std::int64_t j = 0; j < k; ++j) {
        if (j == p) continue;
        if (s[static_cast<std::size_t>(r * k + j)] + margin - sp > 0.0) {
          g[static_cast<std::size_t>(r * k + j)] += go;
          g[static_cast<std::size_t>(r * k + p)] -= go;
        }
      }
    }
  });
}

}  // namespace dgf
