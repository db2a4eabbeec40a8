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
#include <filesystem>
#include <fstream>
#include <limits>

#include "core/error.hpp"
#include "harness/synth.hpp"
#include "train/trainer.hpp"
#include "test_util.hpp"

namespace dgf {
namespace {

using testing::scratch_dir;
using testing::small_config;
using testing::small_synth;

std::vector<PreparedScenario> prepared(std::uint64_t seed, int n) {
  std::vector<PreparedScenario> out;
  for (const auto& item : generate_synthetic(small_synth(seed, n))) out.push_back(prepare_scenario(item.scenario));
  return out;
}

TrainConfig small_train(std::uint64_t seed, int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.seed = seed;
  c.model = small_config();
  c.model.seed = seed;
  return c;
}

double dataset_loss(const Trainer& t, const std::vector<PreparedScenario>& data) {
  NoGradGuard guard;
  double s = 0.0;
  for (const auto& p : data) s += t.scenario_loss(p, 0, 0).total.item();
  return s / static_cast<double>(data.size());
}

TEST(Schedule, StandardSegments) {
  const auto s = LrSchedule::standard();
  EXPECT_EQ(s.at(1), 5e-5);
  EXPECT_EQ(s.at(5), 5e-5);
  EXPECT_EQ(s.at(6), 5e-4);
  EXPECT_EQ(s.at(40), 5e-4);
  EXPECT_EQ(s.at(41), 5e-5);
  EXPECT_EQ(s.at(50), 5e-5);
  EXPECT_EQ(s.at(1000), 5e-5);
}

TEST(Schedule, ScaledBoundaries) {
  const auto s = LrSchedule::standard().scaled(500);
  EXPECT_EQ(s.at(50), 5e-5);
  EXPECT_EQ(s.at(51), 5e-4);
  EXPECT_EQ(s.at(400), 5e-4);
  EXPECT_EQ(s.at(401), 5e-5);
  const auto same = LrSchedule::standard().scaled(50);
  for (int e = 1; e <= 60; ++e) EXPECT_EQ(same.at(e), LrSchedule::standard().at(e));
  EXPECT_THROW(LrSchedule::standard().scaled(0), ContractError);
  EXPECT_THROW(LrSchedule({{5, -1.0}}), ContractError);
}

TEST(Adam, MatchesManualUpdate) {
  ParamStore store;
  Tensor w = store.constant("w", {2}, 0.5);
  Adam adam(store);
  const double grads[3][2] = {{1.0, -2.0}, {0.5, 0.0}, {-1.0, 3.0}};
  double m[2] = {0, 0}, v[2] = {0, 0}, x[2] = {0.5, 0.5};
  for (int t = 1; t <= 3; ++t) {
    store.zero_grad();
    sum(mul(w, Tensor::from({2}, {grads[t - 1][0], grads[t - 1][1]}))).backward();
    adam.step(0.01);
    for (int j = 0; j < 2; ++j) {
      const double g = grads[t - 1][j];
      m[j] = 0.9 * m[j] + 0.1 * g;
      v[j] = 0.999 * v[j] + 0.001 * g * g;
      x[j] -= 0.01 * (m[j] / (1 - std::pow(0.9, t))) / (std::sqrt(v[j] / (1 - std::pow(0.999, t))) + 1e-8);
      EXPECT_NEAR(w[j], x[j], 1e-15);
    }
  }
  EXPECT_EQ(adam.steps(), 3);
}

TEST(Adam, StateRoundTrip) {
  ParamStore store;
  Tensor w = store.constant("w", {3}, 1.0);
  Adam a(store);
  sum(mul(w, w)).backward();
  a.step(0.1);
  Adam b(store);
  b.load_state(a.state());
  EXPECT_EQ(b.steps(), 1);
  auto broken = a.state();
  broken.pop_back();
  Adam c(store);
  EXPECT_THROW(c.load_state(broken), SchemaError);
}

TEST(TrainConfigFile, ParsesAndRoundTrips) {
  const auto c = parse_train_config(R"({"epochs": 7, "batch_size": 4, "seed": 9,
      "lr_schedule": [[2, 1e-3], [-1, 1e-4]], "loss_weights": {"alpha": 1, "beta": 0.5, "lambda": 0},
      "model": {"hidden": 16, "heads": 2, "pyramid_channels": [8, 16], "use_dm": false},
      "target_min_ade": 0.1})");
  EXPECT_EQ(c.epochs, 7);
  EXPECT_EQ(c.batch_size, 4);
  EXPECT_EQ(c.model.seed, 9u);
  EXPECT_EQ(c.model.pyramid_strides, (std::vector<int>{1, 2}));
  EXPECT_FALSE(c.model.use_dm);
  EXPECT_EQ(c.weights.lambda, 0.0);
  EXPECT_EQ(*c.target_min_ade, 0.1);
  EXPECT_FALSE(c.target_min_fde);
  const auto again = parse_train_config(serialize_train_config(c));
  EXPECT_EQ(serialize_train_config(again), serialize_train_config(c));
}

TEST(TrainConfigFile, Errors) {
  auto message = [](const std::string& text) {
    try {
      parse_train_config(text);
    } catch (const SchemaError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"epochs": 3, "bogus": 1})").find("bogus"), std::string::npos);
  EXPECT_NE(message(R"({"epochs": "three"})").find("epochs"), std::string::npos);
  EXPECT_NE(message(R"({"model": {"width": 3}})").find("model.width"), std::string::npos);
  EXPECT_NE(message(R"({"lr_schedule": [[1]]})").find("lr_schedule"), std::string::npos);
  EXPECT_NE(message("{not json").find("malformed"), std::string::npos);
  EXPECT_THROW(parse_train_config(R"({"epochs": 0})"), ContractError);
  EXPECT_THROW(parse_train_config(R"({"loss_weights": {"beta": -1}})"), ContractError);
  EXPECT_THROW(load_train_config("/nonexistent/train.json"), IoError);
}

class LossDecrease : public ::testing::TestWithParam<int> {};

TEST_P(LossDecrease, StrictlyOverTenEpochs) {
  const auto seed = static_cast<std::uint64_t>(GetParam());
  const auto data = prepared(100 + seed, 8);
  auto cfg = small_train(seed, 10);
  DgfNet model(cfg.model);
  Trainer trainer(model, cfg);
  double prev = dataset_loss(trainer, data);
  for (int e = 1; e <= 10; ++e) {
    trainer.run_epoch(data, {});
    const double now = dataset_loss(trainer, data);
    EXPECT_LT(now, prev) << "epoch " << e;
    prev = now;
  }
}

INSTANTIATE_TEST_SUITE_P(ThreeSeeds, LossDecrease, ::testing::Values(1, 2, 3));

TEST(Trainer, ResumeIsBitExact) {
  const auto data = prepared(7, 6);
  auto cfg = small_train(4, 3);
  cfg.batch_size = 2;
  cfg.model.dropout = 0.1;
  const auto path = (scratch_dir("resume") / "one.ckpt").string();

  DgfNet a(cfg.model);
  Trainer ta(a, cfg);
  ta.run_epoch(data, {});
  ta.save(path);
  const auto next_a = ta.run_epoch(data, {});

  std::vector<NamedTensor> entries;
  auto b = load_model(path, &entries);
  Trainer tb(*b, cfg);
  tb.resume(entries);
  EXPECT_EQ(tb.epoch(), 1);
  EXPECT_EQ(tb.step(), ta.step() / 2);
  const auto next_b = tb.run_epoch(data, {});
  EXPECT_EQ(next_a.reg, next_b.reg);
  EXPECT_EQ(next_a.cls, next_b.cls);
  EXPECT_EQ(next_a.reg_c, next_b.reg_c);
  const auto& pa = a.params().parameters();
  const auto& pb = b->params().parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    ASSERT_EQ(pa[i].name, pb[i].name);
    for (std::int64_t j = 0; j < pa[i].tensor.numel(); ++j) ASSERT_EQ(pa[i].tensor[j], pb[i].tensor[j]) << pa[i].name;
  }
}

TEST(Trainer, FitWritesLogAndCheckpointAndStopsAtTargets) {
  const auto data = prepared(8, 3);
  auto cfg = small_train(5, 4);
  cfg.out_dir = scratch_dir("fit").string();
  cfg.target_min_ade = 1e9;
  cfg.target_min_fde = 1e9;
  DgfNet model(cfg.model);
  Trainer trainer(model, cfg);
  int calls = 0;
  const auto logs = trainer.fit(data, data, [&](const EpochLog&) { ++calls; });
  ASSERT_EQ(logs.size(), 1u);
  EXPECT_EQ(calls, 1);
  ASSERT_TRUE(logs[0].val_min_ade);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "last.ckpt"));
  std::ifstream log(std::filesystem::path(cfg.out_dir) / "train_log.csv");
  std::string header;
  std::getline(log, header);
  EXPECT_EQ(header, "epoch,lr,L_reg,L_cls,L_reg_c,val_minADE,val_minFDE");
}

TEST(Trainer, NonFiniteLossNamesTheBatch) {
  const auto data = prepared(9, 2);
  auto cfg = small_train(6, 1);
  DgfNet model(cfg.model);
  for (const auto& param : model.params().parameters()) {
    if (param.name.rfind("final.traj", 0) != 0) continue;
    Tensor w = param.tensor;
    for (auto& v : w.mutable_values()) v = std::numeric_limits<double>::quiet_NaN();
  }
  Trainer trainer(model, cfg);
  try {
    trainer.run_epoch(data, {});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Trainer, EmptyDatasetIsRejected) {
  auto cfg = small_train(1, 1);
  DgfNet model(cfg.model);
  Trainer trainer(model, cfg);
  EXPECT_THROW(trainer.run_epoch({}, {}), ContractError);
}

}  // namespace
}  // namespace dgf
