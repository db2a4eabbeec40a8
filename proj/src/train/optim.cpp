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
#include "train/optim.hpp"

#include <cmath>

#include "core/error.hpp"

namespace dgf {

Adam::Adam(const ParamStore& store, AdamOptions opt) : params_(store.parameters()), opt_(opt) {
  for (const auto& p : params_) {
    m_.emplace_back(static_cast<std::size_t>(p.tensor.numel()), 0.0);
    v_.emplace_back(static_cast<std::size_t>(p.tensor.numel()), 0.0);
  }
}

void Adam::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i].tensor;
    if (!p.has_grad()) continue;
    auto g = p.grad_view();
    auto w = p.mutable_values();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = opt_.beta1 * m[j] + (1.0 - opt_.beta1) * g[j];
      v[j] = opt_.beta2 * v[j] + (1.0 - opt_.beta2) * g[j] * g[j];
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + opt_.eps);
    }
  }
}

std::vector<NamedTensor> Adam::state() const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& shape = params_[i].tensor.shape();
    out.push_back({"optim.m." + params_[i].name, Tensor::from(shape, m_[i])});
    out.push_back({"optim.v." + params_[i].name, Tensor::from(shape, v_[i])});
  }
  out.push_back({"optim.t", Tensor::scalar(static_cast<double>(t_))});
  return out;
}

void Adam::load_state(const std::vector<NamedTensor>& entries) {
  auto fetch = [&](const std::string& name, std::vector<double>& dst) {
    const auto* e = find_entry(entries, name);
    if (e == nullptr) throw SchemaError(name + ": missing from checkpoint");
    if (static_cast<std::size_t>(e->tensor.numel()) != dst.size()) throw SchemaError(name + ": shape mismatch");
    auto src = e->tensor.values();
    dst.assign(src.begin(), src.end());
  };
  for (std::size_t i = 0; i < params_.size(); ++i) {
    fetch("optim.m." + params_[i].name, m_[i]);
    fetch("optim.v." + params_[i].name, v_[i]);
  }
  const auto* t = find_entry(entries, "optim.t");
  if (t == nullptr) throw SchemaError("optim.t: missing from checkpoint");
  t_ = static_cast<std::int64_t>(t->tensor.item());
}

}  // namespace dgf
