// src/model/reference_encoder.cc
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

#include "toktx/model/reference_encoder.h"

#include <stdexcept>
#include <string>

#include "toktx/grad/ops.h"

namespace toktx::model {

using namespace toktx::grad;

ReferenceEncoder::ReferenceEncoder(ParameterSet &ps, std::size_t feat_dim, std::size_t d_ref,
                                   std::mt19937_64 &rng)
    : feat_dim_(feat_dim), d_ref_(d_ref) {
  frame_proj_ = Linear(ps, "ref.frame", 3 * feat_dim, d_ref, rng);
  score_ = Linear(ps, "ref.score", d_ref, 1, rng);
  out_proj_ = Linear(ps, "ref.out", d_ref, d_ref, rng);
}

Tensor ReferenceEncoder::Features(const quantizer::FrameMatrix &frames) {
  const std::size_t L = frames.rows, F = frames.dim;
  std::vector<double> v(L * 3 * F, 0.0);
  for (std::size_t t = 0; t < L; ++t) {
    double *row = v.data() + t * 3 * F;
    for (std::size_t d = 0; d < F; ++d) {
      const double x = frames.Row(t)[d];
      const double dx = t == 0 ? 0.0 : x - frames.Row(t - 1)[d];
      row[d] = x;
      row[F + d] = dx;
      row[2 * F + d] = dx * dx;
    }
  }
  return Tensor({L, 3 * F}, std::move(v));
}

Tensor ReferenceEncoder::Forward(const quantizer::FrameMatrix &frames) const {
  if (frames.rows == 0) throw std::invalid_argument("reference encoder: empty reference");
  if (frames.dim != feat_dim_)
    throw std::invalid_argument("reference encoder: frame width " + std::to_string(frames.dim) +
                                ", expected " + std::to_string(feat_dim_));
  Tensor h = Tanh(frame_proj_(Features(frames)));            // [L, D_ref]
  Tensor w = Softmax(Transpose(score_(h)));                  // [1, L]
  Tensor pooled = out_proj_(MatMul(w, h));                   // [1, D_ref]
  return Reshape(pooled, {d_ref_});
}

}  // namespace toktx::model
