// src/grad/adam.cc
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

#include "toktx/grad/adam.h"

#include <cmath>
#include <iostream>

namespace toktx::grad {

Adam::Adam(std::vector<Tensor> params, AdamOptions opts)
    : params_(std::move(params)), opts_(opts) {
  for (const auto &p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
  warned_.assign(params_.size(), false);
}

void Adam::Step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor &p = params_[i];
    if (!p.has_grad()) {
      if (!warned_[i]) {
        std::cerr << "adam: parameter " << i << " has no gradient; skipped\n";
        warned_[i] = true;
      }
      continue;
    }
    auto g = p.grad();
    auto w = p.mutable_data();
    auto &m = m_[i];
    auto &v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = opts_.beta1 * m[j] + (1.0 - opts_.beta1) * g[j];
      v[j] = opts_.beta2 * v[j] + (1.0 - opts_.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1, vhat = v[j] / bc2;
      w[j] -= opts_.lr * mhat / (std::sqrt(vhat) + opts_.eps);
    }
  }
}

void Adam::ZeroGrad() {
  for (auto &p : params_) p.ZeroGrad();
}

double ClipGradNorm(const std::vector<Tensor> &params, double max_norm) {
  double sq = 0.0;
  for (const auto &p : params)
    for (double g : p.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (const auto &p : params)
      for (double &g : p.impl()->grad) g *= s;
  }
  return norm;
}

}  // namespace toktx::grad
