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
#include "train/schedule.hpp"

#include <cmath>

#include "core/error.hpp"

namespace dgf {

LrSchedule::LrSchedule(std::vector<LrSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw ContractError("lr schedule: no segments");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!(segments_[i].lr > 0.0)) throw ContractError("lr schedule: learning rates must be positive");
    if (i > 0 && segments_[i].last_epoch < segments_[i - 1].last_epoch && i + 1 < segments_.size()) {
      throw ContractError("lr schedule: boundaries must not decrease");
    }
  }
}

LrSchedule LrSchedule::standard() { return LrSchedule({{5, 5e-5}, {40, 5e-4}, {-1, 5e-5}}); }

double LrSchedule::at(int epoch) const {
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    if (epoch <= segments_[i].last_epoch) return segments_[i].lr;
  }
  return segments_.back().lr;
}

LrSchedule LrSchedule::scaled(int total_epochs, int reference_epochs) const {
  if (total_epochs < 1 || reference_epochs < 1) throw ContractError("lr schedule: epoch counts must be positive");
  auto out = segments_;
  const double f = static_cast<double>(total_epochs) / reference_epochs;
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    out[i].last_epoch = static_cast<int>(std::lround(out[i].last_epoch * f));
  }
  return LrSchedule(std::move(out));
}

}  // namespace dgf
