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

#include "model/heads.hpp"

namespace dgf {

struct LossWeights {
  double alpha = 0.7;   // final regression
  double beta = 0.1;    // classification
  double lambda = 0.2;  // intermediate regression

  void validate() const;
};

inline constexpr double kScoreMargin = 0.2;

/// Per agent, the mode whose endpoint is closest to the ground-truth endpoint
/// (first one on ties). endpoints [N, K, 2], gt [N, T, 2].
std::vector<std::int64_t> nearest_endpoint_modes(const Tensor& endpoints, const Tensor& gt);

/// Winner-take-all smooth-L1 over the selected mode's full trajectory, averaged
/// over steps, coordinates and agents. Throws ContractError with no agents.
Tensor regression_loss(const PredictionSet& pred, const Tensor& gt);

/// Hinge on raw scores with the nearest-endpoint mode as the positive.
Tensor classification_loss(const Tensor& scores, const Tensor& endpoints, const Tensor& gt,
                           double margin = kScoreMargin);

struct LossTerms {
  Tensor total;
  double reg = 0.0, cls = 0.0, reg_c = 0.0;
};

/// alpha * reg(final) + beta * cls(final) + lambda * reg(intermediate). Without
/// an intermediate set the last term is zero.
LossTerms total_loss(const PredictionSet& final_pred, const PredictionSet* intermediate, const Tensor& gt,
                     const LossWeights& w);

}  // namespace dgf
