// src/model/text_encoder.cc
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

#include "toktx/model/text_encoder.h"

#include <stdexcept>
#include <string>

#include "toktx/grad/ops.h"

namespace toktx::model {

TextEncoder::TextEncoder(ParameterSet &ps, std::size_t vocab, std::size_t d, std::size_t heads,
                         std::size_t layers, std::size_t ff, std::mt19937_64 &rng)
    : vocab_(vocab), d_(d) {
  embedding_ = ps.Add("text.embedding", UniformInit(rng, {vocab, d}, 1.0));
  for (std::size_t l = 0; l < layers; ++l)
    blocks_.emplace_back(ps, "text.block" + std::to_string(l), d, heads, ff, rng);
  final_ln_ = AffineLayerNorm(ps, "text.ln", d);
}

Tensor TextEncoder::Forward(std::span<const int> text) const {
  if (text.empty()) throw std::invalid_argument("text encoder: empty input");
  for (int id : text)
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_)
      throw std::out_of_range("text encoder: unknown symbol id " + std::to_string(id));
  Tensor x = grad::Add(grad::Gather(embedding_, text), SinusoidalPositions(text.size(), d_));
  for (const auto &b : blocks_) x = b.Forward(x, false);
  return final_ln_(x);
}

}  // namespace toktx::model
