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
#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "harness/synth.hpp"
#include "model/dgfnet.hpp"
#include "train/losses.hpp"
#include "test_util.hpp"

namespace dgf {
namespace {

using testing::random_tensor;
using testing::small_config;
using testing::small_synth;

/// Prediction whose endpoints are the last trajectory step.
PredictionSet make_prediction(Tensor traj, Tensor logits = {}) {
  const auto n = traj.dim(0), k = traj.dim(1), t = traj.dim(2);
  PredictionSet p;
  p.endpoints = reshape(slice(traj, 2, t - 1, 1), {n, k, 2});
  p.trajectories = traj;
  if (logits.defined()) {
    p.logits = logits;
    p.probabilities = softmax(logits);
  }
  return p;
}

double huber(double r) {
  r = std::abs(r);
  return r < 1.0 ? 0.5 * r * r : r - 0.5;
}

double wta_oracle(const Tensor& traj, const Tensor& gt) {
  const auto n = traj.dim(0), k = traj.dim(1), t = traj.dim(2);
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::int64_t m = 0; m < k; ++m) {
      const auto e = ((i * k + m) * t + t - 1) * 2;
      const auto g = (i * t + t - 1) * 2;
      const double d = std::hypot(traj[e] - gt[g], traj[e + 1] - gt[g + 1]);
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    for (std::int64_t s = 0; s < 2 * t; ++s) total += huber(traj[(i * k + best) * t * 2 + s] - gt[i * t * 2 + s]);
  }
  return total / static_cast<double>(n * t * 2);
}

double hinge_oracle(const Tensor& scores, const Tensor& traj, const Tensor& gt, double margin) {
  const auto n = traj.dim(0), k = traj.dim(1), t = traj.dim(2);
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t pos = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::int64_t m = 0; m < k; ++m) {
      const auto e = ((i * k + m) * t + t - 1) * 2;
      const auto g = (i * t + t - 1) * 2;
      const double d = std::hypot(traj[e] - gt[g], traj[e + 1] - gt[g + 1]);
      if (d < best_d) {
        best_d = d;
        pos = m;
      }
    }
    double row = 0.0;
    for (std::int64_t m = 0; m < k; ++m) {
      if (m != pos) row += std::max(0.0, scores[i * k + m] + margin - scores[i * k + pos]);
    }
    total += row / static_cast<double>(k - 1);
  }
  return total / static_cast<double>(n);
}

TEST(Regression, ExactModeGivesZero) {
  Rng rng(51);
  Tensor gt = random_tensor({1, 5, 2}, rng, 3.0);
  Tensor far = add(reshape(gt, {1, 1, 5, 2}), Tensor::full({1, 1, 5, 2}, 40.0));
  Tensor traj = concat({far, reshape(gt, {1, 1, 5, 2})}, 1);
  EXPECT_EQ(regression_loss(make_prediction(traj), gt).item(), 0.0);
}

TEST(Regression, MatchesWinnerTakeAllOracle) {
  Rng rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor traj = random_tensor({3, 6, 5, 2}, rng, 4.0), gt = random_tensor({3, 5, 2}, rng, 4.0);
    EXPECT_NEAR(regression_loss(make_prediction(traj), gt).item(), wta_oracle(traj, gt), 1e-12);
  }
}

TEST(Regression, Errors) {
  Rng rng(53);
  EXPECT_THROW(regression_loss(make_prediction(Tensor::zeros({0, 6, 5, 2})), Tensor::zeros({0, 5, 2})),
               ContractError);
  EXPECT_THROW(regression_loss(make_prediction(random_tensor({2, 6, 5, 2}, rng)), Tensor::zeros({2, 4, 2})),
               DimensionError);
}

TEST(Classification, Examples) {
  Rng rng(54);
  Tensor traj = random_tensor({2, 6, 4, 2}, rng, 5.0), gt = random_tensor({2, 4, 2}, rng, 5.0);
  const auto endpoints = make_prediction(traj).endpoints;
  EXPECT_NEAR(classification_loss(Tensor::zeros({2, 6}), endpoints, gt).item(), kScoreMargin, 1e-15);

  const auto pos = nearest_endpoint_modes(endpoints, gt);
  std::vector<double> s(12, 0.0);
  for (int i = 0; i < 2; ++i) s[static_cast<std::size_t>(i * 6 + pos[static_cast<std::size_t>(i)])] = 0.2;
  EXPECT_EQ(classification_loss(Tensor::from({2, 6}, s), endpoints, gt).item(), 0.0);
}

TEST(Classification, MatchesHingeOracle) {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor traj = random_tensor({4, 6, 3, 2}, rng, 4.0), gt = random_tensor({4, 3, 2}, rng, 4.0);
    Tensor scores = random_tensor({4, 6}, rng, 0.3);
    EXPECT_NEAR(classification_loss(scores, make_prediction(traj).endpoints, gt).item(),
                hinge_oracle(scores, traj, gt, kScoreMargin), 1e-12);
  }
}

TEST(Total, UnitComponentsGiveWeightSum) {
  Tensor gt = Tensor::zeros({1, 4, 2});
  Tensor traj = Tensor::full({1, 6, 4, 2}, 1.5);
  // Mode 0 wins the tie; negatives score 0.8 above it so each hinge is 1.
  Tensor logits = Tensor::from({1, 6}, {0, 0.8, 0.8, 0.8, 0.8, 0.8});
  const PredictionSet fin = make_prediction(traj, logits), inter = make_prediction(traj);
  const LossTerms t = total_loss(fin, &inter, gt, LossWeights{});
  EXPECT_NEAR(t.reg, 1.0, 1e-15);
  EXPECT_NEAR(t.cls, 1.0, 1e-15);
  EXPECT_NEAR(t.reg_c, 1.0, 1e-15);
  EXPECT_NEAR(t.total.item(), 1.0, 1e-12);
}

TEST(Total, ZeroWhenEveryComponentIsZero) {
  Rng rng(56);
  Tensor gt = random_tensor({2, 4, 2}, rng);
  Tensor traj = broadcast_to(reshape(gt, {2, 1, 4, 2}), {2, 6, 4, 2});
  Tensor logits = Tensor::from({2, 6}, {5, 0, 0, 0, 0, 0, 5, 0, 0, 0, 0, 0});
  const PredictionSet fin = make_prediction(traj, logits);
  EXPECT_EQ(total_loss(fin, &fin, gt, LossWeights{}).total.item(), 0.0);
}

TEST(Total, NonNegativeAndPositiveWhenAnyComponentIs) {
  Rng rng(57);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor gt = random_tensor({2, 4, 2}, rng, 3.0);
    const PredictionSet fin = make_prediction(random_tensor({2, 6, 4, 2}, rng, 3.0), random_tensor({2, 6}, rng));
    const PredictionSet inter = make_prediction(random_tensor({2, 6, 4, 2}, rng, 3.0));
    const LossTerms t = total_loss(fin, &inter, gt, LossWeights{});
    EXPECT_GE(t.total.item(), 0.0);
    if (t.reg > 0 || t.cls > 0 || t.reg_c > 0) EXPECT_GT(t.total.item(), 0.0);
  }
}

TEST(Total, RejectsNegativeWeightsAndMissingScores) {
  Rng rng(58);
  Tensor gt = random_tensor({1, 4, 2}, rng);
  const PredictionSet fin = make_prediction(random_tensor({1, 6, 4, 2}, rng), random_tensor({1, 6}, rng));
  EXPECT_THROW(total_loss(fin, nullptr, gt, LossWeights{0.7, -0.1, 0.2}), ContractError);
  EXPECT_THROW(total_loss(make_prediction(random_tensor({1, 6, 4, 2}, rng)), nullptr, gt, LossWeights{}),
               ContractError);
}

/// Backpropagates the total loss of one synthetic scenario and reports
/// whether any parameter under `prefix` received a non-zero gradient.
class GradientFlow : public ::testing::Test {
 protected:
  bool reaches(DgfNet& model, const LossWeights& w, const std::string& prefix) {
    const auto p = prepare_scenario(generate_synthetic(small_synth(5, 1)).front().scenario);
    model.params().zero_grad();
    ForwardContext fc;
    const ModelOutput out = model.forward(p, fc);
    const PredictionSet fin = out.final_prediction.select(p.supervised);
    const PredictionSet inter = out.intermediate.select(p.supervised);
    total_loss(fin, &inter, p.ground_truth, w).total.backward();
    bool any = false;
    for (const auto& param : model.params().parameters()) {
      if (param.name.rfind(prefix, 0) != 0 || !param.tensor.has_grad()) continue;
      for (double g : param.tensor.grad_view()) {
        EXPECT_TRUE(std::isfinite(g)) << param.name;
        any = any || g != 0.0;
      }
    }
    return any;
  }
};

TEST_F(GradientFlow, ReachesBothDecoders) {
  DgfNet model(small_config());
  EXPECT_TRUE(reaches(model, LossWeights{}, "intermediate."));
  EXPECT_TRUE(reaches(model, LossWeights{}, "final."));
}

TEST_F(GradientFlow, WithoutIntermediateWeightOnlyTheFuturePathFeedsTheFirstDecoder) {
  ModelConfig open = small_config();
  open.tau = std::numeric_limits<double>::infinity();
  DgfNet through_futures(open);
  EXPECT_TRUE(reaches(through_futures, LossWeights{0.7, 0.1, 0.0}, "intermediate."));

  ModelConfig closed = small_config();
  closed.tau = 0.0;
  DgfNet masked(closed);
  EXPECT_FALSE(reaches(masked, LossWeights{0.7, 0.1, 0.0}, "intermediate."));
  EXPECT_TRUE(reaches(masked, LossWeights{0.7, 0.1, 0.2}, "intermediate."));
}

}  // namespace
}  // namespace dgf
