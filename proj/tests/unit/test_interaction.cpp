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

#include <numeric>

#include "core/error.hpp"
#include "model/interaction.hpp"
#include "test_util.hpp"

namespace dgf {
namespace {

using testing::max_abs_diff;
using testing::random_tensor;
using testing::small_config;

/// Plain attention block recomputed from the named parameters.
Tensor reference_block(const ParamStore& s, const std::string& p, const Tensor& x, const Tensor& ctx, int heads) {
  auto lin = [&](const std::string& n, const Tensor& t) { return linear(t, s.find(p + n + ".weight"), s.find(p + n + ".bias")); };
  if (ctx.dim(0) == 0) return layer_norm(x, s.find(p + ".norm.gamma"), s.find(p + ".norm.beta"), -1);
  Tensor att = attention(lin(".q", x), lin(".k", ctx), lin(".v", ctx), heads);
  return layer_norm(add(x, lin(".out", att)), s.find(p + ".norm.gamma"), s.find(p + ".norm.beta"), -1);
}

void zero_matching(ParamStore& store, const std::vector<std::string>& suffixes) {
  for (const auto& p : store.parameters()) {
    for (const auto& suf : suffixes) {
      if (p.name.size() >= suf.size() && p.name.compare(p.name.size() - suf.size(), suf.size(), suf) == 0) {
        Tensor t = p.tensor;
        for (auto& v : t.mutable_values()) v = 0.0;
      }
    }
  }
}

Tensor row_norm(const Tensor& x) {
  const auto w = x.dim(-1);
  return layer_norm(x, Tensor::from({w}, std::vector<double>(static_cast<std::size_t>(w), 1.0)), Tensor::zeros({w}), -1);
}

class Interaction : public ::testing::Test {
 protected:
  ModelConfig cfg = small_config();
  ParamStore store;
  Rng rng{31};
  SceneInteraction scene{store, "scene", cfg, rng};
  AgentInteraction agent{store, "agent", cfg, rng};
  ForwardContext fc;
  std::int64_t d = cfg.hidden;
};

TEST_F(Interaction, Shapes) {
  for (auto [n, l] : {std::pair<std::int64_t, std::int64_t>{1, 1}, {4, 9}, {1, 0}}) {
    Tensor a = random_tensor({n, d}, rng), m = random_tensor({l, d}, rng);
    auto [x, lanes] = scene(a, m, fc);
    EXPECT_EQ(x.shape(), (Shape{n, d}));
    EXPECT_EQ(lanes.shape(), (Shape{l, d}));
    EXPECT_EQ(agent(a, m, random_tensor({n, n + l, d}, rng), fc).shape(), (Shape{n, d}));
    EXPECT_EQ(agent(a, m, random_tensor({n + l, n + l, d}, rng), fc).shape(), (Shape{n, d}));
  }
}

TEST_F(Interaction, Errors) {
  Tensor a = random_tensor({3, d}, rng), m = random_tensor({2, d}, rng);
  EXPECT_THROW(scene(Tensor::zeros({0, d}), m, fc), ContractError);
  EXPECT_THROW(scene(a, random_tensor({2, d + 1}, rng), fc), DimensionError);
  EXPECT_THROW(agent(a, m, random_tensor({3, 4, d}, rng), fc), DimensionError);
}

TEST_F(Interaction, SceneLayersFollowLaneThenAgentOrder) {
  Tensor a = random_tensor({4, d}, rng), m = random_tensor({6, d}, rng);
  Tensor x = a, lanes = m;
  for (int i = 0; i < cfg.scene_layers; ++i) {
    const std::string p = "scene.layer" + std::to_string(i);
    lanes = reference_block(store, p + ".ma", lanes, x, cfg.heads);
    lanes = reference_block(store, p + ".mm", lanes, lanes, cfg.heads);
    x = reference_block(store, p + ".am", x, lanes, cfg.heads);
    x = reference_block(store, p + ".aa", x, x, cfg.heads);
  }
  auto [xa, la] = scene(a, m, fc);
  EXPECT_LT(max_abs_diff(xa, x), 1e-10);
  EXPECT_LT(max_abs_diff(la, lanes), 1e-10);
}

TEST_F(Interaction, ZeroRelativePoseEqualsPlainAttention) {
  Tensor a = random_tensor({3, d}, rng), m = random_tensor({5, d}, rng);
  Tensor x = a;
  for (int i = 0; i < cfg.agent_layers; ++i) {
    x = reference_block(store, "agent.layer" + std::to_string(i), x, concat({x, m}, 0), cfg.heads);
  }
  EXPECT_LT(max_abs_diff(agent(a, m, Tensor::zeros({3, 8, d}), fc), x), 1e-10);
}

TEST_F(Interaction, ZeroValueProjectionReducesToRepeatedNorm) {
  zero_matching(store, {".v.weight", ".v.bias", ".out.bias", ".edge_v.weight"});
  Tensor a = random_tensor({3, d}, rng, 4.0), m = random_tensor({5, d}, rng, 4.0);
  Tensor xs = a, ls = m;
  for (int i = 0; i < 2 * cfg.scene_layers; ++i) {
    xs = row_norm(xs);
    ls = row_norm(ls);
  }
  auto [x, lanes] = scene(a, m, fc);
  EXPECT_LT(max_abs_diff(x, xs), 1e-10);
  EXPECT_LT(max_abs_diff(lanes, ls), 1e-10);

  Tensor xa = a;
  for (int i = 0; i < cfg.agent_layers; ++i) xa = row_norm(xa);
  EXPECT_LT(max_abs_diff(agent(a, m, random_tensor({3, 8, d}, rng), fc), xa), 1e-10);
}

TEST_F(Interaction, PermutationEquivariance) {
  const std::int64_t n = 5, l = 4;
  Tensor a = random_tensor({n, d}, rng), m = random_tensor({l, d}, rng), e = random_tensor({n, n + l, d}, rng);
  const std::vector<std::int64_t> perm{3, 0, 4, 1, 2};
  std::vector<std::int64_t> cols(perm);
  for (std::int64_t j = n; j < n + l; ++j) cols.push_back(j);

  auto [x, lanes] = scene(a, m, fc);
  auto [xp, lanes_p] = scene(index_select(a, 0, perm), m, fc);
  EXPECT_LT(max_abs_diff(index_select(x, 0, perm), xp), 1e-10);
  EXPECT_LT(max_abs_diff(lanes, lanes_p), 1e-10);

  Tensor ep = index_select(index_select(e, 0, perm), 1, cols);
  EXPECT_LT(max_abs_diff(index_select(agent(a, m, e, fc), 0, perm), agent(index_select(a, 0, perm), m, ep, fc)),
            1e-10);
}

}  // namespace
}  // namespace dgf
