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
#include <vector>

#include "core/checkpoint.hpp"
#include "core/nn.hpp"

namespace dgf {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over every parameter of a store. Parameters without a gradient buffer
/// are left untouched for that step.
class Adam {
 public:
  explicit Adam(const ParamStore& store, AdamOptions opt = {});

  void step(double lr);
  std::int64_t steps() const { return t_; }

  /// Moments as "optim.m.<param>" / "optim.v.<param>" plus "optim.t".
  std::vector<NamedTensor> state() const;
  /// Throws SchemaError when an entry is missing or misshapen.
  void load_state(const std::vector<NamedTensor>& entries);

 private:
  std::vector<Parameter> params_;
  std::vector<std::vector<double>> m_, v_;
  AdamOptions opt_;
  std::int64_t t_ = 0;
};

}  // namespace dgf
