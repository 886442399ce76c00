// include/toktx/model/reference_encoder.h
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

#ifndef TOKTX_MODEL_REFERENCE_ENCODER_H_
#define TOKTX_MODEL_REFERENCE_ENCODER_H_

#include "toktx/model/layers.h"
#include "toktx/quantizer/codebook.h"

namespace toktx::model {

// Per-frame features [x, dx, dx*dx] (dx_0 = 0), a tanh projection, attentive
// pooling over frames and an output projection.  [L, F] -> h_ref [D_ref].
class ReferenceEncoder {
 public:
  ReferenceEncoder() = default;
  ReferenceEncoder(ParameterSet &ps, std::size_t feat_dim, std::size_t d_ref, std::mt19937_64 &rng);

  // Throws std::invalid_argument on an empty reference or wrong width.
  Tensor Forward(const quantizer::FrameMatrix &frames) const;

  // The constant feature matrix [L, 3F] fed to the projection.
  static Tensor Features(const quantizer::FrameMatrix &frames);

 private:
  std::size_t feat_dim_ = 0, d_ref_ = 0;
  Linear frame_proj_, score_, out_proj_;
};

}  // namespace toktx::model

#endif  // TOKTX_MODEL_REFERENCE_ENCODER_H_
