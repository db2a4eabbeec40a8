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

#include <span>
#include <vector>

#include "eval/dump.hpp"
#include "eval/metrics.hpp"
#include "model/dgfnet.hpp"

namespace dgf {

struct EvalOptions {
  bool with_dac = true;
  /// Lane half-width for the drivable area when a scenario carries none.
  double lane_half_width = 2.5;
};

/// Converts a model output to a dump in the scenario's global frame.
PredictionDump to_dump(const PreparedScenario& p, const ModelOutput& out);

/// Evaluation-mode forward without graph recording.
PredictionDump predict(const DgfNet& model, const PreparedScenario& p);

/// Metrics of one dump against the scenario's ground truth. Agents without
/// ground truth are skipped; returns nullopt when none remain.
std::optional<MetricReport> evaluate_dump(const Scenario& s, const PredictionDump& d, const EvalOptions& opt = {});

/// Predicts every scenario and combines the per-scenario reports.
MetricReport evaluate_model(const DgfNet& model, std::span<const PreparedScenario> data, const EvalOptions& opt = {});

}  // namespace dgf
