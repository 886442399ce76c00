// include/toktx/model/joint_network.h
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

#ifndef TOKTX_MODEL_JOINT_NETWORK_H_
#define TOKTX_MODEL_JOINT_NETWORK_H_

#include <cstdint>
#include <span>
#include <vector>

#include "toktx/model/layers.h"

namespace toktx::model {

// Node (u, t) input is h_in[u] + h_out[t].  Each residual block applies a
// conditional layer norm, LN(z) * (g + A h_ref) + (b + B h_ref), then a ReLU
// feed-forward part.  A final layer norm and a zero-initialized head give
// V + 1 logits, log-normalized per node (blank last).
class JointNetwork {
 public:
  // Per-utterance scale and shift vectors, one pair per block.
  struct Conditioning {
    std::vector<Tensor> scale;
    std::vector<Tensor> shift;
  };

  JointNetwork() = default;
  JointNetwork(ParameterSet &ps, std::size_t d, std::size_t d_ref, std::size_t outputs,
               std::size_t ff, std::size_t blocks, bool cond_shift, std::mt19937_64 &rng);

  Conditioning Condition(const Tensor &h_ref) const;

  // [N, D] -> [N, V+1] log-probabilities.
  Tensor Forward(const Tensor &z, const Conditioning &c) const;
  // Every node: -> [U, T+1, V+1].
  Tensor Dense(const Tensor &h_in, const Tensor &h_out, const Conditioning &c) const;
  // Listed nodes only: -> [N, V+1].
  Tensor Nodes(const Tensor &h_in, const Tensor &h_out, const Conditioning &c,
               std::span<const int> us, std::span<const int> ts) const;

  // Number of node rows evaluated since the last reset.
  std::uint64_t nodes_evaluated() const { return nodes_; }
  void ResetCounter() { nodes_ = 0; }

  // Sets every h_ref projection to zero, which reduces each conditional
  // layer norm to an affine layer norm independent of h_ref.
  void ZeroConditioning();

  std::size_t outputs() const { return outputs_; }

 private:
  struct Block {
    Tensor gain, bias;
    Linear scale_proj, shift_proj;
    Linear ff1, ff2;
  };

  std::size_t d_ = 0, outputs_ = 0;
  bool cond_shift_ = true;
  std::vector<Block> blocks_;
  AffineLayerNorm final_ln_;
  Linear head_;
  mutable std::uint64_t nodes_ = 0;
};

}  // namespace toktx::model

#endif  // TOKTX_MODEL_JOINT_NETWORK_H_
