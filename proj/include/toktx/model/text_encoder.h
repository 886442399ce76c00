// include/toktx/model/text_encoder.h
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

#ifndef TOKTX_MODEL_TEXT_ENCODER_H_
#define TOKTX_MODEL_TEXT_ENCODER_H_

#include <span>
#include <vector>

#include "toktx/model/layers.h"

namespace toktx::model {

// Embedding plus sinusoidal positions, then bidirectional attention blocks
// and a final layer norm.  [U] symbol ids -> h_in [U, D].
class TextEncoder {
 public:
  TextEncoder() = default;
  TextEncoder(ParameterSet &ps, std::size_t vocab, std::size_t d, std::size_t heads,
              std::size_t layers, std::size_t ff, std::mt19937_64 &rng);

  // Throws std::invalid_argument on an empty input, std::out_of_range on an
  // unknown id.
  Tensor Forward(std::span<const int> text) const;

  std::size_t vocab() const { return vocab_; }

 private:
  std::size_t vocab_ = 0, d_ = 0;
  Tensor embedding_;
  std::vector<AttentionBlock> blocks_;
  AffineLayerNorm final_ln_;
};

}  // namespace toktx::model

#endif  // TOKTX_MODEL_TEXT_ENCODER_H_
