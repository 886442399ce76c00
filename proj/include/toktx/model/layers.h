// include/toktx/model/layers.h
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

#ifndef TOKTX_MODEL_LAYERS_H_
#define TOKTX_MODEL_LAYERS_H_

#include <cstddef>
#include <random>
#include <string>

#include "toktx/grad/parameters.h"
#include "toktx/grad/tensor.h"

namespace toktx::model {

using grad::ParameterSet;
using grad::Tensor;

// Uniform in [-bound, bound].
Tensor UniformInit(std::mt19937_64 &rng, grad::Shape shape, double bound);
// Square matrix with orthonormal columns (Gram-Schmidt on a Gaussian draw).
Tensor OrthogonalInit(std::mt19937_64 &rng, std::size_t n);

// y = x W + b with W: [in, out].  Default init is uniform(+-1/sqrt(in)).
class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet &ps, const std::string &name, std::size_t in, std::size_t out,
         std::mt19937_64 &rng, bool bias = true, bool zero_init = false);
  // Starts from the given [in, out] weight.
  Linear(ParameterSet &ps, const std::string &name, Tensor init_w, bool bias);

  Tensor operator()(const Tensor &x) const;

  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  const Tensor &weight() const { return w_; }

 private:
  std::size_t in_ = 0, out_ = 0;
  Tensor w_, b_;
};

// Layer norm with learned gain (init 1) and bias (init 0).
class AffineLayerNorm {
 public:
  AffineLayerNorm() = default;
  AffineLayerNorm(ParameterSet &ps, const std::string &name, std::size_t d);
  Tensor operator()(const Tensor &x) const;

 private:
  Tensor gain_, bias_;
};

// Fixed sinusoidal encodings for positions offset .. offset+n-1 -> [n, d].
Tensor SinusoidalPositions(std::size_t n, std::size_t d, std::size_t offset = 0);

// Cached keys and values of one attention block, one row per past position.
struct KvCache {
  Tensor k;  // [t, d], undefined while empty
  Tensor v;
  std::size_t size() const { return k.defined() ? k.dim(0) : 0; }
};

// Pre-norm multi-head self-attention block with a ReLU feed-forward part.
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(ParameterSet &ps, const std::string &name, std::size_t d, std::size_t heads,
                 std::size_t ff, std::mt19937_64 &rng);

  // [n, d] -> [n, d].  With `causal`, row i only attends to rows <= i.
  Tensor Forward(const Tensor &x, bool causal) const;
  // Processes one new row [1, d] given the rows already in `cache`, then
  // appends its key and value.  Matches row n of a causal Forward.
  Tensor Step(const Tensor &x_row, KvCache &cache) const;

 private:
  Tensor Attend(const Tensor &q, const Tensor &k, const Tensor &v, const Tensor *mask) const;
  Tensor FeedForward(const Tensor &x) const;

  std::size_t d_ = 0, heads_ = 0;
  AffineLayerNorm ln1_, ln2_;
  Linear wq_, wk_, wv_, wo_, ff1_, ff2_;
};

// One unidirectional LSTM layer (gate order i, f, g, o).
class LstmLayer {
 public:
  struct State {
    Tensor h;  // [1, hidden]
    Tensor c;
  };

  LstmLayer() = default;
  LstmLayer(ParameterSet &ps, const std::string &name, std::size_t in, std::size_t hidden,
            std::mt19937_64 &rng);

  State Zero() const;
  State Step(const Tensor &x_row, const State &s) const;
  // [n, in] -> [n, hidden] from the zero state.
  Tensor Forward(const Tensor &x) const;

  std::size_t hidden() const { return hidden_; }

 private:
  State Cell(const Tensor &gates, const State &s) const;

  std::size_t hidden_ = 0;
  Linear wx_, wh_;
};

}  // namespace toktx::model

#endif  // TOKTX_MODEL_LAYERS_H_
