// include/toktx/grad/adam.h
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

#ifndef TOKTX_GRAD_ADAM_H_
#define TOKTX_GRAD_ADAM_H_

#include <cstdint>
#include <vector>

#include "toktx/grad/tensor.h"

namespace toktx::grad {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

// Adam with bias correction.  Moment buffers live alongside each parameter
// for the lifetime of the optimizer.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions opts = {});

  // Parameters with no grad buffer are skipped (one warning per parameter).
  void Step();
  void ZeroGrad();

  void set_lr(double lr) { opts_.lr = lr; }
  const AdamOptions &options() const { return opts_; }
  std::int64_t steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  std::vector<bool> warned_;
  AdamOptions opts_;
  std::int64_t t_ = 0;
};

// Rescales all gradients so their joint L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double ClipGradNorm(const std::vector<Tensor> &params, double max_norm);

}  // namespace toktx::grad

#endif  // TOKTX_GRAD_ADAM_H_
