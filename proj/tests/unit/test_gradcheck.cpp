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

#include <vector>

#include "core/gradcheck.hpp"
#include "core/nn.hpp"
#include "core/ops.hpp"
#include "harness/gradcheck_suite.hpp"
#include "test_util.hpp"

namespace dgf {
namespace {

using testing::random_tensor;

/// y = 2x with a backward rule that claims 3.
Tensor broken_double(const Tensor& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (auto& v : out) v *= 2.0;
  return Tensor::make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
    auto g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 3.0 * self.grad[i];
  });
}

TEST(FiniteDiff, IdentityHasZeroError) {
  Rng rng(1);
  Tensor x = random_tensor({3, 3}, rng);
  auto r = finite_diff_check([](const Tensor& t) { return t; }, x, 1e-6, 1e-4);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.max_rel_err, 1e-9);
  EXPECT_EQ(r.coords_checked, 9);
}

TEST(FiniteDiff, AttentionPasses) {
  Rng rng(2);
  Tensor q = random_tensor({3, 8}, rng), k = random_tensor({5, 8}, rng), v = random_tensor({5, 8}, rng);
  Tensor w = random_tensor({3, 8}, rng);
  std::vector<Tensor> wrt{q, k, v};
  GradCheckOptions opt;
  opt.eps = 1e-4;
  auto r = finite_diff_check([&] { return mul(attention(q, k, v, 2), w); }, wrt, opt);
  EXPECT_TRUE(r.pass) << r.max_rel_err << " at " << r.location;
}

TEST(FiniteDiff, CorruptedBackwardFails) {
  Rng rng(3);
  Tensor x = random_tensor({4}, rng);
  auto r = finite_diff_check(broken_double, x, 1e-6, 1e-4);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_rel_err, 1.0 / 3.0, 1e-6);
  EXPECT_FALSE(r.location.empty());
}

TEST(FiniteDiff, RestoresInputs) {
  Rng rng(4);
  Tensor x = random_tensor({5}, rng);
  const std::vector<double> before(x.values().begin(), x.values().end());
  finite_diff_check([](const Tensor& t) { return mul(t, t); }, x, 1e-6, 1e-4);
  EXPECT_EQ(std::vector<double>(x.values().begin(), x.values().end()), before);
  EXPECT_FALSE(x.requires_grad());
}

/// Every layer type over ten seeds, each output weighted by random
/// coefficients so that no gradient is trivially uniform.
class LayerSeeds : public ::testing::TestWithParam<int> {
 protected:
  static GradCheckReport check(const std::function<Tensor()>& f, std::vector<Tensor> wrt, std::uint64_t seed) {
    Rng rng(seed, {99});
    Tensor probe = f();
    Tensor w = random_tensor(probe.shape(), rng);
    GradCheckOptions opt;
    opt.eps = 1e-5;
    opt.max_coords_per_tensor = 24;
    opt.seed = seed;
    return finite_diff_check([&] { return mul(f(), w); }, wrt, opt);
  }
};

TEST_P(LayerSeeds, AllLayerTypesPass) {
  const auto seed = static_cast<std::uint64_t>(GetParam());
  Rng rng(seed);
  ParamStore store;
  ForwardContext fc;

  Tensor q = random_tensor({3, 8}, rng), k = random_tensor({5, 8}, rng), v = random_tensor({5, 8}, rng);
  auto r = check([&] { return attention(q, k, v, 2); }, {q, k, v}, seed);
  EXPECT_TRUE(r.pass) << "attention " << r.max_rel_err << " " << r.location;

  Linear eq(store, "eq", 3, 8, rng), ek(store, "ek", 3, 8, rng), ev(store, "ev", 3, 8, rng);
  Tensor edge = random_tensor({3, 5, 3}, rng);
  r = check([&] { return edge_attention(q, k, v, edge, eq, ek, ev, 2); }, {q, k, v, edge, ek.weight}, seed);
  EXPECT_TRUE(r.pass) << "edge attention " << r.max_rel_err << " " << r.location;

  AttentionBlock block(store, "blk", 8, 2, false, rng);
  r = check([&] { return block(q, k, fc); }, {q, k, block.q.weight, block.norm.gamma}, seed);
  EXPECT_TRUE(r.pass) << "attention block " << r.max_rel_err << " " << r.location;

  Tensor x = random_tensor({2, 3, 9}, rng);
  Res1d res(store, "res", 3, 6, 2, rng);
  r = check([&] { return res(x); }, {x}, seed);
  EXPECT_TRUE(r.pass) << "res1d " << r.max_rel_err << " " << r.location;

  r = check([&] { return upsample2(x); }, {x}, seed);
  EXPECT_TRUE(r.pass) << "upsample2 " << r.max_rel_err << " " << r.location;

  Tensor h = random_tensor({4, 6}, rng);
  Mlp mlp(store, "mlp", 6, 5, 4, 2, rng);
  r = check([&] { return mlp(h); }, {h}, seed);
  EXPECT_TRUE(r.pass) << "mlp " << r.max_rel_err << " " << r.location;

  r = check([&] { return softmax(h); }, {h}, seed);
  EXPECT_TRUE(r.pass) << "softmax " << r.max_rel_err << " " << r.location;

  r = check([&] { return max_over(reshape(h, {4, 3, 2}), 1); }, {h}, seed);
  EXPECT_TRUE(r.pass) << "max " << r.max_rel_err << " " << r.location;
}

INSTANTIATE_TEST_SUITE_P(TenSeeds, LayerSeeds, ::testing::Range(1, 11));

TEST(Suite, EveryBlockPasses) {
  const auto cases = run_gradcheck_suite(0, 1e-4);
  EXPECT_GE(cases.size(), 15u);
  double total = 0.0;
  for (const auto& c : cases) {
    total += c.seconds;
    EXPECT_TRUE(c.report.pass) << c.name << ": " << c.report.max_rel_err << " at " << c.report.location;
    EXPECT_GT(c.report.coords_checked, 0) << c.name;
  }
  EXPECT_LT(total, 60.0);
}

}  // namespace
}  // namespace dgf
