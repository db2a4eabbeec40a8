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
#include "train/losses.hpp"

#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace dgf {

void LossWeights::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && lambda >= 0.0)) throw ContractError("loss weights must be non-negative");
}

std::vector<std::int64_t> nearest_endpoint_modes(const Tensor& endpoints, const Tensor& gt) {
  if (endpoints.ndim() != 3 || endpoints.dim(2) != 2) throw DimensionError("endpoints must be [N, K, 2]");
  if (gt.ndim() != 3 || gt.dim(2) != 2 || gt.dim(0) != endpoints.dim(0)) {
    throw DimensionError("ground truth must be [N, T, 2] with N matching the prediction");
  }
  const auto n = endpoints.dim(0), k = endpoints.dim(1), t = gt.dim(1);
  auto e = endpoints.values();
  auto g = gt.values();
  std::vector<std::int64_t> best(static_cast<std::size_t>(n), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double gx = g[static_cast<std::size_t>((i * t + t - 1) * 2)];
    const double gy = g[static_cast<std::size_t>((i * t + t - 1) * 2 + 1)];
    double best_d = std::numeric_limits<double>::infinity();
    for (std::int64_t m = 0; m < k; ++m) {
      const double dx = e[static_cast<std::size_t>((i * k + m) * 2)] - gx;
      const double dy = e[static_cast<std::size_t>((i * k + m) * 2 + 1)] - gy;
      const double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best[static_cast<std::size_t>(i)] = m;
      }
    }
  }
  return best;
}

Tensor regression_loss(const PredictionSet& pred, const Tensor& gt) {
  if (pred.agents() == 0) throw ContractError("regression loss: no supervised agents");
  if (gt.shape() != Shape{pred.trajectories.dim(0), pred.trajectories.dim(2), 2}) {
    throw DimensionError("regression loss: ground truth " + shape_str(gt.shape()) + " does not match trajectories " +
                         shape_str(pred.trajectories.shape()));
  }
  const auto best = nearest_endpoint_modes(pred.endpoints, gt);
  return smooth_l1(gather_modes(pred.trajectories, best), gt);
}

Tensor classification_loss(const Tensor& scores, const Tensor& endpoints, const Tensor& gt, double margin) {
  return max_margin(scores, nearest_endpoint_modes(endpoints, gt), margin);
}

LossTerms total_loss(const PredictionSet& final_pred, const PredictionSet* intermediate, const Tensor& gt,
                     const LossWeights& w) {
  w.validate();
  if (!final_pred.logits.defined()) throw ContractError("total loss: final prediction has no scores");
  LossTerms out;
  Tensor reg = regression_loss(final_pred, gt);
  Tensor cls = classification_loss(final_pred.logits, final_pred.endpoints, gt);
  out.reg = reg.item();
  out.cls = cls.item();
  out.total = add(scale(reg, w.alpha), scale(cls, w.beta));
  if (intermediate != nullptr) {
    Tensor reg_c = regression_loss(*intermediate, gt);
    out.reg_c = reg_c.item();
    out.total = add(out.total, scale(reg_c, w.lambda));
  }
  return out;
}

}  // namespace dgf
