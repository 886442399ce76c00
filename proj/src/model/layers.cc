// src/model/layers.cc
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

#include "toktx/model/layers.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "toktx/grad/ops.h"

namespace toktx::model {

using namespace toktx::grad;

Tensor UniformInit(std::mt19937_64 &rng, Shape shape, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(NumElements(shape));
  for (double &x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v));
}

Tensor OrthogonalInit(std::mt19937_64 &rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> cols(n, std::vector<double>(n));
  for (auto &c : cols)
    for (double &x : c) x = normal(rng);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      double dot = 0.0;
      for (std::size_t r = 0; r < n; ++r) dot += cols[j][r] * cols[i][r];
      for (std::size_t r = 0; r < n; ++r) cols[j][r] -= dot * cols[i][r];
    }
    double norm = 0.0;
    for (double x : cols[j]) norm += x * x;
    norm = std::sqrt(norm);
    for (double &x : cols[j]) x /= norm;
  }
  std::vector<double> v(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < n; ++j) v[r * n + j] = cols[j][r];
  return Tensor({n, n}, std::move(v));
}

Linear::Linear(ParameterSet &ps, const std::string &name, std::size_t in, std::size_t out,
               std::mt19937_64 &rng, bool bias, bool zero_init)
    : in_(in), out_(out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  w_ = ps.Add(name + ".w", zero_init ? Tensor({in, out}, 0.0) : UniformInit(rng, {in, out}, bound));
  if (bias) b_ = ps.Add(name + ".b", Tensor({out}, 0.0));
}

Linear::Linear(ParameterSet &ps, const std::string &name, Tensor init_w, bool bias)
    : in_(init_w.dim(0)), out_(init_w.dim(1)) {
  w_ = ps.Add(name + ".w", std::move(init_w));
  if (bias) b_ = ps.Add(name + ".b", Tensor({out_}, 0.0));
}

Tensor Linear::operator()(const Tensor &x) const {
  Tensor y = MatMul(x, w_);
  return b_.defined() ? Add(y, b_) : y;
}

AffineLayerNorm::AffineLayerNorm(ParameterSet &ps, const std::string &name, std::size_t d)
    : gain_(ps.Add(name + ".gain", Tensor({d}, 1.0))), bias_(ps.Add(name + ".bias", Tensor({d}, 0.0))) {}

Tensor AffineLayerNorm::operator()(const Tensor &x) const {
  return Add(Mul(LayerNorm(x), gain_), bias_);
}

Tensor SinusoidalPositions(std::size_t n, std::size_t d, std::size_t offset) {
  std::vector<double> v(n * d);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < d; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / d);
      const double a = static_cast<double>(p + offset) * freq;
      v[p * d + i] = (i % 2 == 0) ? std::sin(a) : std::cos(a);
    }
  return Tensor({n, d}, std::move(v));
}

AttentionBlock::AttentionBlock(ParameterSet &ps, const std::string &name, std::size_t d,
                               std::size_t heads, std::size_t ff, std::mt19937_64 &rng)
    : d_(d), heads_(heads) {
  if (heads == 0 || d % heads != 0)
    throw std::invalid_argument("attention width " + std::to_string(d) + " not divisible by " +
                                std::to_string(heads) + " heads");
  ln1_ = AffineLayerNorm(ps, name + ".ln1", d);
  wq_ = Linear(ps, name + ".wq", d, d, rng);
  wk_ = Linear(ps, name + ".wk", d, d, rng);
  wv_ = Linear(ps, name + ".wv", d, d, rng);
  wo_ = Linear(ps, name + ".wo", d, d, rng);
  ln2_ = AffineLayerNorm(ps, name + ".ln2", d);
  ff1_ = Linear(ps, name + ".ff1", d, ff, rng);
  ff2_ = Linear(ps, name + ".ff2", ff, d, rng);
}

Tensor AttentionBlock::Attend(const Tensor &q, const Tensor &k, const Tensor &v,
                              const Tensor *mask) const {
  const std::size_t dh = d_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> outs;
  for (std::size_t h = 0; h < heads_; ++h) {
    Tensor qh = Slice(q, 1, h * dh, (h + 1) * dh);
    Tensor kh = Slice(k, 1, h * dh, (h + 1) * dh);
    Tensor vh = Slice(v, 1, h * dh, (h + 1) * dh);
    Tensor scores = Scale(MatMul(qh, Transpose(kh)), scale);
    if (mask) scores = Add(scores, *mask);
    outs.push_back(MatMul(Softmax(scores), vh));
  }
  return wo_(heads_ == 1 ? outs[0] : Concat(outs, 1));
}

Tensor AttentionBlock::FeedForward(const Tensor &x) const { return ff2_(Relu(ff1_(ln2_(x)))); }

Tensor AttentionBlock::Forward(const Tensor &x, bool causal) const {
  if (x.rank() != 2 || x.dim(1) != d_) throw ShapeError("attention block", x.shape(), {0, d_});
  const std::size_t n = x.dim(0);
  Tensor mask;
  if (causal) {
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m[i * n + j] = -std::numeric_limits<double>::infinity();
    mask = Tensor({n, n}, std::move(m));
  }
  Tensor y = ln1_(x);
  Tensor h = Add(x, Attend(wq_(y), wk_(y), wv_(y), causal ? &mask : nullptr));
  return Add(h, FeedForward(h));
}

Tensor AttentionBlock::Step(const Tensor &x_row, KvCache &cache) const {
  Tensor y = ln1_(x_row);
  Tensor k = wk_(y), v = wv_(y);
  cache.k = cache.k.defined() ? Concat({cache.k, k}, 0) : k;
  cache.v = cache.v.defined() ? Concat({cache.v, v}, 0) : v;
  Tensor h = Add(x_row, Attend(wq_(y), cache.k, cache.v, nullptr));
  return Add(h, FeedForward(h));
}

LstmLayer::LstmLayer(ParameterSet &ps, const std::string &name, std::size_t in, std::size_t hidden,
                     std::mt19937_64 &rng)
    : hidden_(hidden) {
  wx_ = Linear(ps, name + ".wx", in, 4 * hidden, rng);
  // Recurrent kernel: one orthogonal block per gate.
  std::vector<double> wh(hidden * 4 * hidden);
  for (std::size_t g = 0; g < 4; ++g) {
    Tensor q = OrthogonalInit(rng, hidden);
    for (std::size_t r = 0; r < hidden; ++r)
      for (std::size_t c = 0; c < hidden; ++c) wh[r * 4 * hidden + g * hidden + c] = q.at(r, c);
  }
  wh_ = Linear(ps, name + ".wh", Tensor({hidden, 4 * hidden}, std::move(wh)), false);
  // Forget-gate bias of 1.
  auto b = ps.Find(name + ".wx.b")->impl()->data.begin();
  std::fill(b + hidden, b + 2 * hidden, 1.0);
}

LstmLayer::State LstmLayer::Zero() const {
  return {Tensor({1, hidden_}, 0.0), Tensor({1, hidden_}, 0.0)};
}

LstmLayer::State LstmLayer::Cell(const Tensor &gates, const State &s) const {
  const std::size_t h = hidden_;
  Tensor i = Sigmoid(Slice(gates, 1, 0, h));
  Tensor f = Sigmoid(Slice(gates, 1, h, 2 * h));
  Tensor g = Tanh(Slice(gates, 1, 2 * h, 3 * h));
  Tensor o = Sigmoid(Slice(gates, 1, 3 * h, 4 * h));
  Tensor c = Add(Mul(f, s.c), Mul(i, g));
  return {Mul(o, Tanh(c)), c};
}

LstmLayer::State LstmLayer::Step(const Tensor &x_row, const State &s) const {
  return Cell(Add(wx_(x_row), wh_(s.h)), s);
}

Tensor LstmLayer::Forward(const Tensor &x) const {
  const std::size_t n = x.dim(0);
  Tensor gx = wx_(x);
  State s = Zero();
  std::vector<Tensor> rows;
  rows.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    s = Cell(Add(Slice(gx, 0, t, t + 1), wh_(s.h)), s);
    rows.push_back(s.h);
  }
  return Concat(rows, 0);
}

}  // namespace toktx::model
