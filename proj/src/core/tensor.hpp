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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dgf {

using Shape = std::vector<std::int64_t>;

std::int64_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

/// One vertex of the reverse-mode graph. Leaves have no backward function.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a backward pass reaches the node
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  /// Grad buffer of this node, zero-initialized on first access.
  std::span<double> grad_buffer();
};

}  // namespace detail

/// Dense row-major array of doubles taking part in reverse-mode differentiation.
///
/// Tensor is a shared handle: copies alias the same storage, as parameters and
/// graph edges need. Use clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  /// Extent of axis; negative axes count from the back.
  std::int64_t dim(int axis) const;
  int ndim() const { return static_cast<int>(shape().size()); }
  std::int64_t numel() const;

  std::span<const double> values() const;
  /// Writable view of the payload. Only meaningful outside a graph (parameter
  /// updates, test setup).
  std::span<double> mutable_values();
  double item() const;
  double operator[](std::int64_t flat_index) const { return values()[static_cast<std::size_t>(flat_index)]; }

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);
  bool has_grad() const;
  /// Gradient after backward(); all zeros when none has been accumulated.
  std::vector<double> grad() const;
  std::span<const double> grad_view() const;
  void zero_grad();

  /// Reverse pass from a scalar. Leaf gradients accumulate across calls until
  /// zero_grad(); interior gradients are recomputed on every call.
  void backward() const;

  /// Same values, cut from the graph.
  Tensor detach() const;
  /// Deep copy of values (no grad, no graph).
  Tensor clone() const;

  detail::Node& node() const { return *node_; }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  /// Builds an op result. Records parents and the backward rule only when grad
  /// mode is on and some parent requires grad.
  static Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                            std::function<void(detail::Node&)> backward_fn);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

}  // namespace dgf
