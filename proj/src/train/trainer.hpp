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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eval/pipeline.hpp"
#include "model/dgfnet.hpp"
#include "train/losses.hpp"
#include "train/optim.hpp"
#include "train/schedule.hpp"

namespace dgf {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 1;  // scenarios per optimizer step
  std::uint64_t seed = 0;
  LrSchedule schedule = LrSchedule::standard();
  /// Stretch the schedule's boundaries from 50 epochs to `epochs`.
  bool scale_schedule = true;
  LossWeights weights;
  ModelConfig model;
  double lane_radius = kLaneRadius;
  int eval_every = 1;
  /// Stop once validation minADE and minFDE (K = 6) are both below these.
  std::optional<double> target_min_ade, target_min_fde;
  /// Where per-epoch checkpoints and the CSV log go; empty disables both.
  std::string out_dir;

  void validate() const;
  LrSchedule effective_schedule() const;
};

/// Parses the JSON training config. Unknown keys are rejected.
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::string& path);
std::string serialize_train_config(const TrainConfig& cfg);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double reg = 0.0, cls = 0.0, reg_c = 0.0;
  std::optional<double> val_min_ade, val_min_fde;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Writes the header when the file is new or empty.
void append_log_row(const std::string& path, const EpochLog& row);

class Trainer {
 public:
  Trainer(DgfNet& model, TrainConfig cfg);

  /// Restores optimizer state and counters; parameters are expected to have
  /// been loaded into the model already.
  void resume(const std::vector<NamedTensor>& entries);
  void save(const std::string& path) const;

  /// Trains epoch() + 1 and, when due, evaluates on val.
  EpochLog run_epoch(std::span<const PreparedScenario> train, std::span<const PreparedScenario> val);
  /// Runs the remaining epochs, writing checkpoints and the CSV log to
  /// out_dir when set. Stops early once the validation targets are met.
  std::vector<EpochLog> fit(std::span<const PreparedScenario> train, std::span<const PreparedScenario> val,
                            const EpochCallback& on_epoch = {});

  /// Training-mode loss of one scenario with the dropout stream of
  /// (epoch, position). Records a graph.
  LossTerms scenario_loss(const PreparedScenario& p, int epoch, std::int64_t position) const;

  int epoch() const { return epoch_; }
  std::int64_t step() const { return optimizer_.steps(); }
  const TrainConfig& config() const { return cfg_; }

 private:
  DgfNet& model_;
  TrainConfig cfg_;
  LrSchedule schedule_;
  Adam optimizer_;
  int epoch_ = 0;
};

}  // namespace dgf
