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
#include "harness/gradcheck_suite.hpp"

#include <chrono>

#include "core/nn.hpp"
#include "harness/synth.hpp"
#include "model/dgfnet.hpp"
#include "train/losses.hpp"

namespace dgf {

namespace {

Tensor random_tensor(const Shape& shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(numel_of(shape)));
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return Tensor::from(shape, std::move(v));
}

/// Sum of f weighted by fixed random coefficients, so no output symmetry
/// (e.g. layer norm rows summing to a constant) hides gradient errors.
std::function<Tensor()> weighted(std::function<Tensor()> f, Rng& rng) {
  auto weights = std::make_shared<Tensor>();
  auto r = std::make_shared<Rng>(rng.next());
  return [f = std::move(f), weights, r] {
    Tensor out = f();
    if (!weights->defined() || weights->shape() != out.shape()) *weights = random_tensor(out.shape(), *r);
    return mul(out, *weights);
  };
}

std::vector<Tensor> params_of(const ParamStore& store) {
  std::vector<Tensor> out;
  for (const auto& p : store.parameters()) out.push_back(p.tensor);
  return out;
}

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.hidden = 8;
  cfg.heads = 2;
  cfg.scene_layers = 1;
  cfg.agent_layers = 1;
  cfg.t_h = 7;
  cfg.t_f = 4;
  cfg.pyramid_channels = {4, 6, 8};
  cfg.dropout = 0.0;
  return cfg;
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed, double tol) {
  std::vector<GradCheckCase> cases;
  Rng rng(seed, {0x6763737569ULL});
  const ModelConfig cfg = small_config();
  const ForwardContext eval_ctx;

  auto run = [&](const std::string& name, std::function<Tensor()> f, std::vector<Tensor> wrt, double eps = 1e-5,
                 std::int64_t max_coords = 12) {
    const auto start = std::chrono::steady_clock::now();
    GradCheckOptions opt;
    opt.eps = eps;
    opt.tol = tol;
    opt.max_coords_per_tensor = max_coords;
    opt.seed = rng.next();
    GradCheckCase c{name, finite_diff_check(weighted(std::move(f), rng), wrt, opt), 0.0};
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    cases.push_back(std::move(c));
  };

  {
    Tensor q = random_tensor({3, 8}, rng), k = random_tensor({5, 8}, rng), v = random_tensor({5, 8}, rng);
    run("attention", [=] { return attention(q, k, v, 2); }, {q, k, v}, 1e-4, 0);
  }
  {
    ParamStore store;
    Linear eq(store, "eq", 8, 8, rng, false), ek(store, "ek", 8, 8, rng, false), ev(store, "ev", 8, 8, rng, false);
    Tensor q = random_tensor({3, 8}, rng), k = random_tensor({4, 8}, rng), v = random_tensor({4, 8}, rng);
    Tensor e = random_tensor({3, 4, 8}, rng);
    auto wrt = params_of(store);
    wrt.insert(wrt.end(), {q, k, v, e});
    run("edge_attention", [=] { return edge_attention(q, k, v, e, eq, ek, ev, 2); }, wrt, 1e-5, 0);
  }
  {
    ParamStore store;
    AttentionBlock block(store, "block", 8, 2, false, rng);
    Tensor x = random_tensor({3, 8}, rng), c = random_tensor({4, 8}, rng);
    auto wrt = params_of(store);
    wrt.insert(wrt.end(), {x, c});
    run("residual_attention_block", [=] { return block(x, c, eval_ctx); }, wrt);
  }
  {
    ParamStore store;
    Res1d res(store, "res", 3, 6, 2, rng);
    Tensor x = random_tensor({2, 3, 8}, rng);
    auto wrt = params_of(store);
    wrt.push_back(x);
    run("conv1d_residual", [=] { return res(x); }, wrt);
  }
  {
    Tensor x = random_tensor({2, 3, 5}, rng);
    run("upsample2", [=] { return upsample2(x); }, {x}, 1e-6, 0);
  }
  {
    ParamStore store;
    ActorEncoder enc(store, "actor", kAgentChannels, cfg, rng);
    Tensor x = random_tensor({2, cfg.t_h + 1, kAgentChannels}, rng);
    auto wrt = params_of(store);
    wrt.push_back(x);
    run("actor_encoder_pyramid", [=] { return enc(x); }, wrt, 1e-5, 6);
  }
  {
    ParamStore store;
    PointAggregateBlock pab(store, "pab", 8, true, rng);
    Tensor x = random_tensor({2, 10, 8}, rng);
    auto wrt = params_of(store);
    wrt.push_back(x);
    run("point_aggregate_block", [=] { return pab(x); }, wrt, 1e-5, 8);
  }
  {
    ParamStore store;
    MapEncoder enc(store, "map", kLaneChannels, cfg, rng);
    Tensor x = random_tensor({2, 10, kLaneChannels}, rng);
    auto wrt = params_of(store);
    wrt.push_back(x);
    run("map_encoder", [=] { return enc(x); }, wrt, 1e-5, 6);
  }
  {
    ParamStore store;
    RpeEncoder enc(store, "rpe", cfg, rng);
    Tensor x = random_tensor({3, 3, kRpeChannels}, rng);
    auto wrt = params_of(store);
    wrt.push_back(x);
    run("rpe_encoder", [=] { return enc(x); }, wrt, 1e-5, 8);
  }
  {
    ParamStore store;
    SceneInteraction inter(store, "scene", cfg, rng);
    Tensor x = random_tensor({2, 8}, rng), m = random_tensor({3, 8}, rng);
    auto wrt = params_of(store);
    wrt.insert(wrt.end(), {x, m});
    run("scene_interaction", [=] {
      auto [a, l] = inter(x, m, eval_ctx);
      return concat({a, l}, 0);
    }, wrt, 1e-5, 4);
  }
  {
    ParamStore store;
    AgentInteraction inter(store, "agent", cfg, rng);
    Tensor a = random_tensor({2, 8}, rng), l = random_tensor({3, 8}, rng), e = random_tensor({2, 5, 8}, rng);
    auto wrt = params_of(store);
    wrt.insert(wrt.end(), {a, l, e});
    run("agent_interaction", [=] { return inter(a, l, e, eval_ctx); }, wrt, 1e-5, 4);
  }
  {
    ParamStore store;
    TrajectoryDecoder dec(store, "intermediate", cfg.hidden, cfg, false, rng);
    Tensor x = random_tensor({2, 8}, rng), origin = random_tensor({2, 2}, rng, 5.0);
    auto wrt = params_of(store);
    wrt.push_back(x);
    run("difficulty_decoder", [=] { return dec(x, origin).trajectories; }, wrt, 1e-5, 6);
  }
  {
    ParamStore store;
    FutureEncoder fut(store, "future", cfg, rng);
    FutureEnhancer enh(store, "enhance", cfg, rng);
    Tensor traj = random_tensor({2, cfg.modes, cfg.t_f, 2}, rng, 3.0);
    Tensor a = random_tensor({3, 8}, rng), m = random_tensor({4, 8}, rng);
    auto wrt = params_of(store);
    wrt.insert(wrt.end(), {traj, a, m});
    run("future_enhancement", [=] { return enh(a, fut(traj), m, eval_ctx); }, wrt, 1e-5, 4);
  }
  {
    ParamStore store;
    TrajectoryDecoder dec(store, "final", cfg.fused_width(), cfg, true, rng);
    Tensor x = random_tensor({2, cfg.fused_width()}, rng), origin = random_tensor({2, 2}, rng, 5.0);
    auto wrt = params_of(store);
    wrt.push_back(x);
    run("final_predictor", [=] {
      auto p = dec(x, origin);
      return concat({reshape(p.trajectories, {2, p.trajectories.numel() / 2}), p.probabilities}, 1);
    }, wrt, 1e-5, 6);
  }
  {
    Tensor traj = random_tensor({3, 4, 5, 2}, rng, 3.0), gt = random_tensor({3, 5, 2}, rng, 3.0);
    run("regression_loss", [=] {
      PredictionSet p;
      p.trajectories = traj;
      p.endpoints = reshape(slice(traj, 2, 4, 1), {3, 4, 2});
      return regression_loss(p, gt);
    }, {traj}, 1e-6, 0);
  }
  {
    Tensor scores = random_tensor({3, 4}, rng, 0.05), ends = random_tensor({3, 4, 2}, rng, 3.0);
    Tensor gt = random_tensor({3, 5, 2}, rng, 3.0);
    run("classification_loss", [=] { return classification_loss(scores, ends, gt); }, {scores}, 1e-6, 0);
  }
  {
    SynthConfig sc;
    sc.n_scenarios = 1;
    sc.agents_min = sc.agents_max = 2;
    sc.unobserved_now_prob = 0.0;
    sc.horizon = {cfg.t_h, cfg.t_f, 10.0};
    sc.seed = seed;
    const auto prepared = prepare_scenario(generate_synthetic(sc).front().scenario);
    auto model = std::make_shared<DgfNet>(cfg);
    const LossWeights w;
    auto wrt = params_of(model->params());
    run("total_loss_full_model", [model, prepared, w] {
      const ModelOutput out = model->forward(prepared, ForwardContext{});
      const auto fin = out.final_prediction.select(prepared.supervised);
      const auto inter = out.intermediate.select(prepared.supervised);
      return total_loss(fin, &inter, prepared.ground_truth, w).total;
    }, wrt, 1e-5, 2);
  }
  return cases;
}

}  // namespace dgf
