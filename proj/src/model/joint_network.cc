// src/model/joint_network.cc
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

#include "toktx/model/joint_network.h"

#include <algorithm>
#include <string>

#include "toktx/grad/ops.h"

namespace toktx::model {

using namespace toktx::grad;

JointNetwork::JointNetwork(ParameterSet &ps, std::size_t d, std::size_t d_ref, std::size_t outputs,
                           std::size_t ff, std::size_t blocks, bool cond_shift, std::mt19937_64 &rng)
    : d_(d), outputs_(outputs), cond_shift_(cond_shift) {
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::string name = "joint.block" + std::to_string(b);
    Block blk;
    blk.gain = ps.Add(name + ".cln.gain", Tensor({d}, 1.0));
    blk.bias = ps.Add(name + ".cln.bias", Tensor({d}, 0.0));
    blk.scale_proj = Linear(ps, name + ".cln.scale", d_ref, d, rng, false);
    if (cond_shift) blk.shift_proj = Linear(ps, name + ".cln.shift", d_ref, d, rng, false);
    blk.ff1 = Linear(ps, name + ".ff1", d, ff, rng);
    blk.ff2 = Linear(ps, name + ".ff2", ff, d, rng);
    blocks_.push_back(std::move(blk));
  }
  final_ln_ = AffineLayerNorm(ps, "joint.ln", d);
  head_ = Linear(ps, "joint.head", d, outputs, rng, true, true);
}

JointNetwork::Conditioning JointNetwork::Condition(const Tensor &h_ref) const {
  Tensor r = Reshape(h_ref, {1, h_ref.numel()});
  Conditioning c;
  for (const auto &blk : blocks_) {
    c.scale.push_back(Add(blk.gain, Reshape(blk.scale_proj(r), {d_})));
    c.shift.push_back(cond_shift_ ? Add(blk.bias, Reshape(blk.shift_proj(r), {d_})) : blk.bias);
  }
  return c;
}

Tensor JointNetwork::Forward(const Tensor &z, const Conditioning &c) const {
  if (z.rank() != 2 || z.dim(1) != d_) throw ShapeError("joint network", z.shape(), {0, d_});
  nodes_ += z.dim(0);
  Tensor x = z;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    Tensor n = Add(Mul(LayerNorm(x), c.scale[b]), c.shift[b]);
    x = Add(x, blocks_[b].ff2(Relu(blocks_[b].ff1(n))));
  }
  return LogSoftmax(head_(final_ln_(x)));
}

Tensor JointNetwork::Nodes(const Tensor &h_in, const Tensor &h_out, const Conditioning &c,
                           std::span<const int> us, std::span<const int> ts) const {
  if (h_in.rank() != 2 || h_out.rank() != 2 || h_in.dim(1) != h_out.dim(1))
    throw ShapeError("joint network inputs", h_in.shape(), h_out.shape());
  if (us.size() != ts.size()) throw std::invalid_argument("joint network: node lists differ in length");
  return Forward(Add(Gather(h_in, us), Gather(h_out, ts)), c);
}

Tensor JointNetwork::Dense(const Tensor &h_in, const Tensor &h_out, const Conditioning &c) const {
  const std::size_t U = h_in.dim(0), T1 = h_out.dim(0);
  std::vector<int> us, ts;
  for (std::size_t u = 0; u < U; ++u)
    for (std::size_t t = 0; t < T1; ++t) {
      us.push_back(static_cast<int>(u));
      ts.push_back(static_cast<int>(t));
    }
  return Reshape(Nodes(h_in, h_out, c, us, ts), {U, T1, outputs_});
}

void JointNetwork::ZeroConditioning() {
  for (auto &blk : blocks_) {
    auto zero = [](const Tensor &w) {
      auto d = w.impl()->data.data();
      std::fill(d, d + w.numel(), 0.0);
    };
    zero(blk.scale_proj.weight());
    if (cond_shift_) zero(blk.shift_proj.weight());
  }
}

}  // namespace toktx::model
