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
#include "train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "json.hpp"

namespace dgf {

using nlohmann::json;

namespace {

constexpr std::uint64_t kShuffleTag = 0x73687566ULL;
constexpr std::uint64_t kDropoutTag = 0x64726f70ULL;

template <typename T>
void read(const json& j, const char* key, T& dst) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string(key) + ": wrong type");
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }) == known.end()) {
      throw SchemaError(where + it.key() + ": unknown key");
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ContractError("train config: epochs must be >= 1");
  if (batch_size < 1) throw ContractError("train config: batch_size must be >= 1");
  if (eval_every < 1) throw ContractError("train config: eval_every must be >= 1");
  if (!(lane_radius > 0.0)) throw ContractError("train config: lane_radius must be positive");
  weights.validate();
  model.validate();
}

LrSchedule TrainConfig::effective_schedule() const { return scale_schedule ? schedule.scaled(epochs) : schedule; }

TrainConfig parse_train_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("train config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("train config: expected an object");
  reject_unknown(j,
                 {"epochs", "batch_size", "seed", "lr_schedule", "scale_schedule", "loss_weights", "model",
                  "lane_radius", "eval_every", "target_min_ade", "target_min_fde", "out_dir"},
                 "");
  TrainConfig c;
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batch_size);
  read(j, "seed", c.seed);
  read(j, "scale_schedule", c.scale_schedule);
  read(j, "lane_radius", c.lane_radius);
  read(j, "eval_every", c.eval_every);
  read(j, "out_dir", c.out_dir);
  if (j.contains("target_min_ade") && !j["target_min_ade"].is_null()) c.target_min_ade = j["target_min_ade"].get<double>();
  if (j.contains("target_min_fde") && !j["target_min_fde"].is_null()) c.target_min_fde = j["target_min_fde"].get<double>();
  if (j.contains("lr_schedule")) {
    const auto& s = j["lr_schedule"];
    if (!s.is_array() || s.empty()) throw SchemaError("lr_schedule: expected [[last_epoch, lr], ...]");
    std::vector<LrSegment> segs;
    for (const auto& seg : s) {
      if (!seg.is_array() || seg.size() != 2 || !seg[0].is_number_integer() || !seg[1].is_number()) {
        throw SchemaError("lr_schedule: expected [[last_epoch, lr], ...]");
      }
      segs.push_back({seg[0].get<int>(), seg[1].get<double>()});
    }
    c.schedule = LrSchedule(std::move(segs));
  }
  if (j.contains("loss_weights")) {
    const auto& w = j["loss_weights"];
    if (!w.is_object()) throw SchemaError("loss_weights: expected an object");
    reject_unknown(w, {"alpha", "beta", "lambda"}, "loss_weights.");
    read(w, "alpha", c.weights.alpha);
    read(w, "beta", c.weights.beta);
    read(w, "lambda", c.weights.lambda);
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    if (!m.is_object()) throw SchemaError("model: expected an object");
    reject_unknown(m,
                   {"hidden", "heads", "scene_layers", "agent_layers", "modes", "tau", "dropout", "pyramid_channels",
                    "use_sff", "use_ffi", "use_dm", "ffi_agent_frame"},
                   "model.");
    read(m, "hidden", c.model.hidden);
    read(m, "heads", c.model.heads);
    read(m, "scene_layers", c.model.scene_layers);
    read(m, "agent_layers", c.model.agent_layers);
    read(m, "modes", c.model.modes);
    read(m, "tau", c.model.tau);
    read(m, "dropout", c.model.dropout);
    read(m, "pyramid_channels", c.model.pyramid_channels);
    read(m, "use_sff", c.model.use_sff);
    read(m, "use_ffi", c.model.use_ffi);
    read(m, "use_dm", c.model.use_dm);
    read(m, "ffi_agent_frame", c.model.ffi_agent_frame);
    c.model.pyramid_strides.assign(c.model.pyramid_channels.size(), 2);
    if (!c.model.pyramid_strides.empty()) c.model.pyramid_strides[0] = 1;
  }
  c.model.seed = c.seed;
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str());
}

std::string serialize_train_config(const TrainConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  json segs = json::array();
  for (const auto& s : c.schedule.segments()) segs.push_back({s.last_epoch, s.lr});
  j["lr_schedule"] = segs;
  j["scale_schedule"] = c.scale_schedule;
  j["loss_weights"] = {{"alpha", c.weights.alpha}, {"beta", c.weights.beta}, {"lambda", c.weights.lambda}};
  j["model"] = {{"hidden", c.model.hidden},       {"heads", c.model.heads},
                {"scene_layers", c.model.scene_layers}, {"agent_layers", c.model.agent_layers},
                {"modes", c.model.modes},         {"tau", c.model.tau},
                {"dropout", c.model.dropout},     {"pyramid_channels", c.model.pyramid_channels},
                {"use_sff", c.model.use_sff},     {"use_ffi", c.model.use_ffi},
                {"use_dm", c.model.use_dm},       {"ffi_agent_frame", c.model.ffi_agent_frame}};
  j["lane_radius"] = c.lane_radius;
  j["eval_every"] = c.eval_every;
  j["target_min_ade"] = c.target_min_ade ? json(*c.target_min_ade) : json(nullptr);
  j["target_min_fde"] = c.target_min_fde ? json(*c.target_min_fde) : json(nullptr);
  j["out_dir"] = c.out_dir;
  return j.dump(2);
}

void append_log_row(const std::string& path, const EpochLog& row) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write " + path);
  if (fresh) out << "epoch,lr,L_reg,L_cls,L_reg_c,val_minADE,val_minFDE\n";
  auto opt = [](const std::optional<double>& v) {
    std::ostringstream s;
    if (v) s << *v;
    return s.str();
  };
  out << row.epoch << ',' << row.lr << ',' << row.reg << ',' << row.cls << ',' << row.reg_c << ','
      << opt(row.val_min_ade) << ',' << opt(row.val_min_fde) << '\n';
}

Trainer::Trainer(DgfNet& model, TrainConfig cfg)
    : model_(model), cfg_(std::move(cfg)), schedule_(cfg_.effective_schedule()), optimizer_(model.params()) {
  cfg_.validate();
}

void Trainer::resume(const std::vector<NamedTensor>& entries) {
  optimizer_.load_state(entries);
  const auto* e = find_entry(entries, "train.epoch");
  if (e == nullptr) throw SchemaError("train.epoch: missing from checkpoint");
  epoch_ = static_cast<int>(e->tensor.item());
}

void Trainer::save(const std::string& path) const {
  auto extra = optimizer_.state();
  extra.push_back({"train.epoch", Tensor::scalar(epoch_)});
  save_model(path, model_, extra);
}

LossTerms Trainer::scenario_loss(const PreparedScenario& p, int epoch, std::int64_t position) const {
  Rng rng(cfg_.seed, {kDropoutTag, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(position)});
  ForwardContext ctx{true, model_.config().dropout, &rng};
  const ModelOutput out = model_.forward(p, ctx);
  const PredictionSet final_pred = out.final_prediction.select(p.supervised);
  if (model_.config().ffi()) {
    const PredictionSet inter = out.intermediate.select(p.supervised);
    return total_loss(final_pred, &inter, p.ground_truth, cfg_.weights);
  }
  return total_loss(final_pred, nullptr, p.ground_truth, cfg_.weights);
}

EpochLog Trainer::run_epoch(std::span<const PreparedScenario> train, std::span<const PreparedScenario> val) {
  if (train.empty()) throw ContractError("train: empty dataset");
  const auto start = std::chrono::steady_clock::now();
  const int epoch = epoch_ + 1;
  EpochLog log;
  log.epoch = epoch;
  log.lr = schedule_.at(epoch);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(cfg_.seed, {kShuffleTag, static_cast<std::uint64_t>(epoch)});
  std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

  std::size_t counted = 0, in_batch = 0;
  auto flush = [&] {
    if (in_batch == 0) return;
    optimizer_.step(log.lr);
    model_.params().zero_grad();
    in_batch = 0;
  };
  model_.params().zero_grad();
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& p = train[order[pos]];
    if (p.supervised.empty()) continue;
    LossTerms terms = scenario_loss(p, epoch, static_cast<std::int64_t>(pos));
    const double value = terms.total.item();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(pos / static_cast<std::size_t>(cfg_.batch_size)) + " (scenario " +
                         p.scenario.id + ")");
    }
    scale(terms.total, 1.0 / cfg_.batch_size).backward();
    log.reg += terms.reg;
    log.cls += terms.cls;
    log.reg_c += terms.reg_c;
    ++counted;
    if (++in_batch == static_cast<std::size_t>(cfg_.batch_size)) flush();
  }
  flush();
  if (counted == 0) throw ContractError("train: no scenario carries ground truth");
  log.reg /= static_cast<double>(counted);
  log.cls /= static_cast<double>(counted);
  log.reg_c /= static_cast<double>(counted);
  epoch_ = epoch;

  if (!val.empty() && (epoch % cfg_.eval_every == 0 || epoch == cfg_.epochs)) {
    EvalOptions opt;
    opt.with_dac = false;
    const auto report = evaluate_model(model_, val, opt);
    log.val_min_ade = report.min_ade_k6;
    log.val_min_fde = report.min_fde_k6;
  }
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

std::vector<EpochLog> Trainer::fit(std::span<const PreparedScenario> train, std::span<const PreparedScenario> val,
                                   const EpochCallback& on_epoch) {
  std::vector<EpochLog> logs;
  if (!cfg_.out_dir.empty()) std::filesystem::create_directories(cfg_.out_dir);
  while (epoch_ < cfg_.epochs) {
    logs.push_back(run_epoch(train, val));
    const auto& row = logs.back();
    if (!cfg_.out_dir.empty()) {
      append_log_row((std::filesystem::path(cfg_.out_dir) / "train_log.csv").string(), row);
      save((std::filesystem::path(cfg_.out_dir) / "last.ckpt").string());
    }
    if (on_epoch) on_epoch(row);
    const bool hit = (cfg_.target_min_ade || cfg_.target_min_fde) && row.val_min_ade &&
                     (!cfg_.target_min_ade || *row.val_min_ade < *cfg_.target_min_ade) &&
                     (!cfg_.target_min_fde || *row.val_min_fde < *cfg_.target_min_fde);
    if (hit) break;
  }
  return logs;
}

}  // namespace dgf
