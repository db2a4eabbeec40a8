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

#include "eval/dump.hpp"

namespace dgf {

struct EnsembleOptions {
  int modes = 6;
  int iterations = 50;
};

/// Clusters one agent's pooled modes by endpoint.
///
/// Centres start from the most probable mode and grow by farthest point, so no
/// random draw is needed. Each cluster's trajectory is the probability-weighted
/// mean of its members and its probability the normalized member sum. Clusters
/// come out ordered by their smallest pooled index. With fewer pooled modes
/// than clusters, the most probable modes are duplicated and their probability
/// split between the copies.
///
/// trajectories: [pool, steps, 2]; probabilities: [pool]. Writes
/// [modes, steps, 2] and [modes].
void cluster_modes(std::span<const double> trajectories, std::span<const double> probabilities, std::int64_t steps,
                   const EnsembleOptions& opt, std::span<double> out_trajectories, std::span<double> out_probabilities);

/// Merges runs over the same scenario and agents. kept and spread come from
/// the first run.
PredictionDump ensemble_merge(std::span<const PredictionDump> runs, const EnsembleOptions& opt = {});

}  // namespace dgf
