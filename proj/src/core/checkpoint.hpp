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
#include <utility>
#include <vector>

#include "core/nn.hpp"
#include "core/tensor.hpp"

namespace dgf {

/// Binary container: magic "DGFCKPT\0", u32 format version, u64 entry count,
/// then per entry u32 name length, name bytes, u32 rank, i64 extents and
/// row-major little-endian f64 payload.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

/// Copies entries named like parameters of `store` into it. Every parameter must
/// be present with a matching shape.
void restore_parameters(ParamStore& store, const std::vector<NamedTensor>& entries);

const NamedTensor* find_entry(const std::vector<NamedTensor>& entries, const std::string& name);

}  // namespace dgf
