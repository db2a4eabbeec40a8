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

#include <stdexcept>
#include <string>

namespace dgf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents disagree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an API precondition (non-scalar loss, empty agent set, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Attention was asked to attend over zero keys.
class EmptyContextError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario, dump, config or checkpoint content.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario content (e.g. focal agent unobserved at t=0, no lanes left).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values during training or evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgf
