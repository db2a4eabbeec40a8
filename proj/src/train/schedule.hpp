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

#include <vector>

namespace dgf {

/// Piecewise-constant learning rate over 1-based epochs.
struct LrSegment {
  int last_epoch;  // inclusive; the final segment is open-ended
  double lr;
};

class LrSchedule {
 public:
  LrSchedule() = default;
  explicit LrSchedule(std::vector<LrSegment> segments);

  /// 5e-5 up to epoch 5, 5e-4 up to epoch 40, then 5e-5.
  static LrSchedule standard();

  double at(int epoch) const;
  /// Stretches boundaries from a run of reference_epochs to total_epochs.
  LrSchedule scaled(int total_epochs, int reference_epochs = 50) const;
  const std::vector<LrSegment>& segments() const { return segments_; }

 private:
  std::vector<LrSegment> segments_;
};

}  // namespace dgf
