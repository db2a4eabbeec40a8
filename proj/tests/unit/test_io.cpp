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
#include <fstream>
#include <functional>

#include "core/checkpoint.hpp"
#include "core/error.hpp"
#include "eval/dump.hpp"
#include "harness/synth.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace dgf {
namespace {

using nlohmann::json;
using testing::random_tensor;
using testing::scratch_dir;
using testing::small_synth;

Scenario sample_scenario() {
  auto cfg = small_synth(91, 1);
  cfg.partial_track_prob = 0.5;
  auto s = generate_synthetic(cfg).front().scenario;
  s.drivable_area = std::vector<Polygon>{{{0, 0}, {4, 0}, {4, 3}}};
  return s;
}

/// Message of the SchemaError raised after `edit` mutates a valid document.
std::string schema_error(const std::function<void(json&)>& edit) {
  json doc = json::parse(serialize_scenario(sample_scenario()));
  edit(doc);
  try {
    parse_scenario(doc.dump());
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "no error";
}

TEST(ScenarioFile, RoundTripIsExact) {
  Rng rng(92);
  auto cfg = small_synth(93, 20);
  cfg.noise_std = 0.2;
  for (const auto& item : generate_synthetic(cfg)) {
    const std::string text = serialize_scenario(item.scenario);
    const Scenario back = parse_scenario(text);
    EXPECT_EQ(serialize_scenario(back), text);
    ASSERT_EQ(back.agents.size(), item.scenario.agents.size());
    for (std::size_t i = 0; i < back.agents.size(); ++i) {
      for (std::size_t t = 0; t < back.agents[i].positions.size(); ++t) {
        EXPECT_EQ(back.agents[i].positions[t], item.scenario.agents[i].positions[t]);
        EXPECT_EQ(back.agents[i].valid[t], item.scenario.agents[i].valid[t]);
      }
    }
  }
  const auto s = sample_scenario();
  const auto path = (scratch_dir("io_scenario") / "s.json").string();
  save_scenario(path, s);
  const auto loaded = load_scenario(path);
  EXPECT_EQ(loaded.id, s.id);
  ASSERT_TRUE(loaded.drivable_area);
  EXPECT_EQ(loaded.drivable_area->front().size(), 3u);
}

TEST(ScenarioFile, ErrorsNameTheField) {
  EXPECT_NE(schema_error([](json& d) { d["agents"][1]["positions"].erase(0); }).find("agents[1].positions"),
            std::string::npos);
  EXPECT_NE(schema_error([](json& d) { d["agents"][0]["headings"][2] = "north"; }).find("agents[0].headings"),
            std::string::npos);
  EXPECT_NE(schema_error([](json& d) { d["lanes"][0]["points"].erase(0); }).find("lanes[0].points"),
            std::string::npos);
  EXPECT_NE(schema_error([](json& d) { d["lanes"][0]["lane_type"] = "diagonal"; }).find("lane_type"),
            std::string::npos);
  EXPECT_NE(schema_error([](json& d) { d["version"] = 99; }).find("version"), std::string::npos);
  EXPECT_NE(schema_error([](json& d) { d["focal_index"] = 40; }).find("focal_index"), std::string::npos);
  EXPECT_NE(schema_error([](json& d) { d.erase("agents"); }).find("agents"), std::string::npos);
  EXPECT_NE(schema_error([](json& d) { d["agents"][0]["future_gt"].erase(0); }).find("agents[0].future_gt"),
            std::string::npos);
  EXPECT_NE(schema_error([](json& d) { d["drivable_area"][0].erase(0); }).find("drivable_area[0]"),
            std::string::npos);
  EXPECT_THROW(parse_scenario("{\"agents\": ["), SchemaError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST(ScenarioFile, RigidMotionPreservesDistances) {
  const auto s = sample_scenario();
  const auto moved = transformed(s, Se2{1.1, {30, -40}});
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const auto& a = s.agents[i].positions;
    const auto& b = moved.agents[i].positions;
    for (std::size_t t = 1; t < a.size(); ++t) EXPECT_NEAR(distance(a[t], a[0]), distance(b[t], b[0]), 1e-9);
  }
  EXPECT_NEAR(moved.agents[0].headings[0] - s.agents[0].headings[0], 1.1, 1e-12);
}

TEST(DumpFile, RoundTripAndErrors) {
  Rng rng(94);
  PredictionDump d;
  d.scenario_id = "abc";
  d.agent_ids = {0, 2};
  d.modes = 2;
  d.steps = 3;
  for (int i = 0; i < 24; ++i) d.trajectories.push_back(rng.uniform(-50, 50));
  d.probabilities = {0.3, 0.7, 0.5, 0.5};
  d.kept = {true, false};
  d.spread = {1.25, 7.5};
  const auto path = (scratch_dir("io_dump") / "d.json").string();
  save_dump(path, d);
  const auto back = load_dump(path);
  EXPECT_EQ(back.scenario_id, d.scenario_id);
  EXPECT_EQ(back.agent_ids, d.agent_ids);
  EXPECT_EQ(back.trajectories, d.trajectories);
  EXPECT_EQ(back.probabilities, d.probabilities);
  EXPECT_EQ(back.kept, d.kept);
  EXPECT_EQ(back.spread, d.spread);

  auto message = [&](const std::function<void(json&)>& edit) {
    json doc = json::parse(serialize_dump(d));
    edit(doc);
    try {
      parse_dump(doc.dump());
    } catch (const SchemaError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message([](json& j) { j["trajectories"][1][0].erase(0); }).find("trajectories"), std::string::npos);
  EXPECT_NE(message([](json& j) { j["probabilities"][0][0] = -1; }).find("probabilities"), std::string::npos);
  EXPECT_NE(message([](json& j) { j["kept"].erase(0); }).find("kept"), std::string::npos);
  EXPECT_NE(message([](json& j) { j.erase("spread"); }).find("spread"), std::string::npos);
  EXPECT_THROW(load_dump("/nonexistent/dump.json"), IoError);
}

TEST(CheckpointFile, RoundTripIsBitExact) {
  Rng rng(95);
  std::vector<NamedTensor> entries{{"a", random_tensor({3, 4}, rng)},
                                   {"b", Tensor::scalar(std::nextafter(1.0, 2.0))},
                                   {"c", Tensor::zeros({0, 5})}};
  const auto path = (scratch_dir("io_ckpt") / "c.ckpt").string();
  save_checkpoint(path, entries);
  const auto back = load_checkpoint(path);
  ASSERT_EQ(back.size(), entries.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].name, entries[i].name);
    EXPECT_EQ(back[i].tensor.shape(), entries[i].tensor.shape());
    for (std::int64_t j = 0; j < back[i].tensor.numel(); ++j) EXPECT_EQ(back[i].tensor[j], entries[i].tensor[j]);
  }
}

TEST(CheckpointFile, CorruptionIsReported) {
  const auto dir = scratch_dir("io_bad_ckpt");
  EXPECT_THROW(load_checkpoint((dir / "missing.ckpt").string()), IoError);
  {
    std::ofstream(dir / "junk.ckpt") << "not a checkpoint at all";
  }
  EXPECT_THROW(load_checkpoint((dir / "junk.ckpt").string()), SchemaError);
  Rng rng(96);
  save_checkpoint((dir / "full.ckpt").string(), {{"w", random_tensor({8, 8}, rng)}});
  std::ifstream in(dir / "full.ckpt", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 9);
  EXPECT_THROW(load_checkpoint((dir / "short.ckpt").string()), SchemaError);
}

TEST(CheckpointFile, RestoreRejectsMismatches) {
  ParamStore store;
  Rng rng(97);
  store.uniform("w", {2, 2}, 2, rng);
  EXPECT_THROW(restore_parameters(store, {{"w", Tensor::zeros({3})}}), SchemaError);
  EXPECT_THROW(restore_parameters(store, {}), SchemaError);
  restore_parameters(store, {{"w", Tensor::full({2, 2}, 0.25)}});
  EXPECT_EQ(store.find("w")[3], 0.25);
}

TEST(SynthFiles, EveryWrittenFileIsReadable) {
  Rng rng(98);
  for (int trial = 0; trial < 5; ++trial) {
    SynthConfig cfg = small_synth(rng.next(), static_cast<int>(rng.integer(1, 6)));
    cfg.agents_max = static_cast<int>(rng.integer(2, 5));
    cfg.noise_std = rng.uniform(0, 0.3);
    const auto dir = scratch_dir("io_synth_" + std::to_string(trial));
    const auto files = write_synthetic(cfg, dir.string());
    ASSERT_EQ(files.size(), static_cast<std::size_t>(cfg.n_scenarios));
    for (const auto& f : files) EXPECT_NO_THROW(validate(load_scenario(f))) << f;
  }
}

}  // namespace
}  // namespace dgf
