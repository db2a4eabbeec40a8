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

namespace dgf {

/// Architecture and switches of one model instance. Ablation switches cascade:
/// FFI needs SFF (the intermediate decoder reads scene-centric features) and
/// DM needs FFI (it gates what FFI sees).
struct ModelConfig {
  int hidden = 128;
  int heads = 8;
  int scene_layers = 3;  // l
  int agent_layers = 3;  // k
  int modes = 6;
  int t_h = 19;
  int t_f = 30;
  double tau = 5.0;
  double dropout = 0.1;
  std::vector<int> pyramid_channels{32, 64, 128};
  std::vector<int> pyramid_strides{1, 2, 2};
  bool use_sff = true;
  bool use_ffi = true;
  bool use_dm = true;
  /// Feed masked futures to the future encoder relative to each agent's own
  /// pose instead of the focal frame.
  bool ffi_agent_frame = false;
  std::uint64_t seed = 0;

  bool sff() const { return use_sff; }
  bool ffi() const { return use_sff && use_ffi; }
  bool dm() const { return ffi() && use_dm; }
  int fused_width() const { return sff() ? 2 * hidden : hidden; }

  /// Throws ContractError on inconsistent values.
  void validate() const;
  /// "none", "SFF", "SFF+FFI" or "SFF+FFI+DM".
  std::string ablation_label() const;
};

}  // namespace dgf
