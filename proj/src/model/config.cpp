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
#include "model/config.hpp"

#include "core/error.hpp"

namespace dgf {

void ModelConfig::validate() const {
  if (hidden < 1 || heads < 1 || hidden % heads != 0) throw ContractError("model: hidden must be divisible by heads");
  if (scene_layers < 1 || agent_layers < 1) throw ContractError("model: interaction depths must be >= 1");
  if (modes < 2) throw ContractError("model: need at least 2 modes");
  if (t_f < 2) throw ContractError("model: t_f must be >= 2");
  if (t_h + 1 < 4) throw ContractError("model: history needs at least 4 steps");
  if (!(tau >= 0.0)) throw ContractError("model: tau must be non-negative");
  if (dropout < 0.0 || dropout >= 1.0) throw ContractError("model: dropout must be in [0, 1)");
  if (pyramid_channels.empty() || pyramid_channels.size() != pyramid_strides.size()) {
    throw ContractError("model: pyramid channels and strides must be non-empty and of equal length");
  }
  for (std::size_t i = 1; i < pyramid_strides.size(); ++i) {
    if (pyramid_strides[i] != 2) throw ContractError("model: pyramid stages after the first must have stride 2");
  }
  if (pyramid_strides[0] != 1) throw ContractError("model: first pyramid stage must have stride 1");
}

std::string ModelConfig::ablation_label() const {
  if (!sff()) return "none";
  if (!ffi()) return "SFF";
  if (!dm()) return "SFF+FFI";
  return "SFF+FFI+DM";
}

}  // namespace dgf
