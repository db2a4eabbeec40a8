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
#include <span>
#include <string>

#include "core/tensor.hpp"

namespace dgf {

struct GradCheckOptions {
  double eps = 1e-6;
  double tol = 1e-4;
  /// Coordinates probed per tensor; <= 0 probes all of them. Sampled
  /// coordinates are drawn with `seed`.
  std::int64_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
  /// When the central difference disagrees and the second difference shows a
  /// kink within eps, compare against the one-sided differences instead.
  bool kink_fallback = true;
  /// When a coordinate fails at eps, also try 10 eps and eps / 10 and keep
  /// the closest estimate.
  bool retry_steps = true;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = true;
  std::int64_t coords_checked = 0;
  /// Coordinates judged by a one-sided difference next to a kink.
  std::int64_t kinks = 0;
  /// "tensor <i> [<flat index>]" of the worst (or first non-finite) coordinate.
  std::string location;
  /// Analytic and numeric derivative at `location`.
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares the analytic gradient of sum(f()) with respect to every tensor in
/// `wrt` against central differences. Relative error |a - n| / max(|a|, |n|),
/// falling back to absolute error when both magnitudes are below 1e-8.
GradCheckReport finite_diff_check(const std::function<Tensor()>& f, std::span<Tensor> wrt,
                                  const GradCheckOptions& options = {});

/// Single-input form: checks d sum(f(x)) / dx.
GradCheckReport finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps,
                                  double tol);

}  // namespace dgf
