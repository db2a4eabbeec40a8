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
#include <string>
#include <vector>

#include "core/gradcheck.hpp"

namespace dgf {

struct GradCheckCase {
  std::string name;
  GradCheckReport report;
  double seconds = 0.0;
};

/// Finite-difference checks of every differentiable block of the network,
/// the decoders and the losses, at reduced widths.
std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed = 0, double tol = 1e-4);

}  // namespace dgf
