// src/grad/parameters.cc
//
// Copyright 2026  The toktx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "toktx/grad/parameters.h"

#include <stdexcept>

namespace toktx::grad {

Tensor ParameterSet::Add(const std::string &name, Tensor value) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  value.set_requires_grad(true);
  index_[name] = items_.size();
  items_.emplace_back(name, value);
  return value;
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(items_.size());
  for (const auto &[name, t] : items_) out.push_back(t);
  return out;
}

const Tensor *ParameterSet::Find(const std::string &name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &items_[it->second].second;
}

std::size_t ParameterSet::NumScalars() const {
  std::size_t n = 0;
  for (const auto &[name, t] : items_) n += t.numel();
  return n;
}

void ParameterSet::ZeroGrad() {
  for (auto &[name, t] : items_) t.ZeroGrad();
}

void ParameterSet::CopyValuesFrom(const std::vector<std::pair<std::string, Tensor>> &other) {
  for (auto &[name, t] : items_) {
    const Tensor *src = nullptr;
    for (const auto &[n, v] : other)
      if (n == name) src = &v;
    if (!src) throw std::runtime_error("missing parameter in source: " + name);
    if (src->shape() != t.shape()) throw ShapeError("load " + name, t.shape(), src->shape());
    std::copy(src->data().begin(), src->data().end(), t.mutable_data().begin());
  }
}

}  // namespace toktx::grad
