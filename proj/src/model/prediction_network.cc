// src/model/prediction_network.cc
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

#include "toktx/model/prediction_network.h"

#include <cstdlib>
#include <stdexcept>

#include "toktx/grad/ops.h"

namespace toktx::model {

std::string PredictorName(PredictorKind kind) {
  return kind == PredictorKind::kRecurrent ? "recurrent" : "attention";
}

PredictorKind ParsePredictor(const std::string &name) {
  if (name == "recurrent" || name == "lstm") return PredictorKind::kRecurrent;
  if (name == "attention" || name == "causal-attention") return PredictorKind::kCausalAttention;
  throw std::invalid_argument("unknown prediction network '" + name + "'");
}

namespace {

std::vector<int> WithSos(std::span<const int> y, std::size_t vocab) {
  std::vector<int> ids{static_cast<int>(vocab)};
  for (int v : y) {
    if (v < 0 || static_cast<std::size_t>(v) >= vocab)
      throw std::out_of_range("prediction network: token " + std::to_string(v) + " outside [0, " +
                              std::to_string(vocab) + ")");
    ids.push_back(v);
  }
  return ids;
}

struct RecurrentState : PredictorState {
  LstmLayer::State s1, s2;
  std::size_t n = 0;
  std::size_t steps() const override { return n; }
};

struct AttentionState : PredictorState {
  std::vector<KvCache> caches;
  std::size_t n = 0;
  std::size_t steps() const override { return n; }
};

}  // namespace

RecurrentPredictor::RecurrentPredictor(ParameterSet &ps, std::size_t vocab, std::size_t d,
                                       std::size_t hidden, std::mt19937_64 &rng)
    : vocab_(vocab) {
  embedding_ = ps.Add("pred.embedding", UniformInit(rng, {vocab + 1, d}, 1.0));
  lstm1_ = LstmLayer(ps, "pred.lstm1", d, hidden, rng);
  lstm2_ = LstmLayer(ps, "pred.lstm2", hidden, hidden, rng);
  proj_ = Linear(ps, "pred.proj", hidden, d, rng);
}

Tensor RecurrentPredictor::Embed(std::span<const int> ids) const { return grad::Gather(embedding_, ids); }

Tensor RecurrentPredictor::Forward(std::span<const int> y) const {
  const auto ids = WithSos(y, vocab_);
  return proj_(lstm2_.Forward(lstm1_.Forward(Embed(ids))));
}

std::unique_ptr<PredictorState> RecurrentPredictor::Start(Tensor *out) const {
  auto st = std::make_unique<RecurrentState>();
  st->s1 = lstm1_.Zero();
  st->s2 = lstm2_.Zero();
  const int sos = static_cast<int>(vocab_);
  st->s1 = lstm1_.Step(Embed(std::span<const int>(&sos, 1)), st->s1);
  st->s2 = lstm2_.Step(st->s1.h, st->s2);
  st->n = 1;
  *out = proj_(st->s2.h);
  return st;
}

Tensor RecurrentPredictor::Step(PredictorState &state, int token) const {
  auto &st = dynamic_cast<RecurrentState &>(state);
  WithSos(std::span<const int>(&token, 1), vocab_);
  st.s1 = lstm1_.Step(Embed(std::span<const int>(&token, 1)), st.s1);
  st.s2 = lstm2_.Step(st.s1.h, st.s2);
  ++st.n;
  return proj_(st.s2.h);
}

AttentionPredictor::AttentionPredictor(ParameterSet &ps, std::size_t vocab, std::size_t d,
                                       std::size_t heads, std::size_t layers, std::size_t ff,
                                       std::mt19937_64 &rng)
    : vocab_(vocab), d_(d) {
  embedding_ = ps.Add("pred.embedding", UniformInit(rng, {vocab + 1, d}, 1.0));
  for (std::size_t l = 0; l < layers; ++l)
    blocks_.emplace_back(ps, "pred.block" + std::to_string(l), d, heads, ff, rng);
  final_ln_ = AffineLayerNorm(ps, "pred.ln", d);
}

Tensor AttentionPredictor::Embed(std::span<const int> ids, std::size_t offset) const {
  return grad::Add(grad::Gather(embedding_, ids), SinusoidalPositions(ids.size(), d_, offset));
}

Tensor AttentionPredictor::Forward(std::span<const int> y) const {
  const auto ids = WithSos(y, vocab_);
  Tensor x = Embed(ids, 0);
  for (const auto &b : blocks_) x = b.Forward(x, true);
  return final_ln_(x);
}

std::unique_ptr<PredictorState> AttentionPredictor::Start(Tensor *out) const {
  auto st = std::make_unique<AttentionState>();
  st->caches.resize(blocks_.size());
  const int sos = static_cast<int>(vocab_);
  Tensor x = Embed(std::span<const int>(&sos, 1), 0);
  for (std::size_t b = 0; b < blocks_.size(); ++b) x = blocks_[b].Step(x, st->caches[b]);
  st->n = 1;
  *out = final_ln_(x);
  return st;
}

Tensor AttentionPredictor::Step(PredictorState &state, int token) const {
  auto &st = dynamic_cast<AttentionState &>(state);
  WithSos(std::span<const int>(&token, 1), vocab_);
  Tensor x = Embed(std::span<const int>(&token, 1), st.n);
  for (std::size_t b = 0; b < blocks_.size(); ++b) x = blocks_[b].Step(x, st.caches[b]);
  ++st.n;
  return final_ln_(x);
}

std::size_t RecurrentPredictorParams(std::size_t vocab, std::size_t d, std::size_t hidden) {
  const std::size_t h4 = 4 * hidden;
  return (vocab + 1) * d + (d * h4 + h4 + hidden * h4) + (hidden * h4 + h4 + hidden * h4) +
         hidden * d + d;
}

std::size_t AttentionPredictorParams(std::size_t vocab, std::size_t d, std::size_t layers,
                                     std::size_t ff) {
  const std::size_t block = 4 * d + 4 * (d * d + d) + (d * ff + ff) + (ff * d + d);
  return (vocab + 1) * d + layers * block + 2 * d;
}

std::size_t MatchedLstmHidden(std::size_t vocab, std::size_t d, std::size_t layers, std::size_t ff) {
  const long target = static_cast<long>(AttentionPredictorParams(vocab, d, layers, ff));
  std::size_t best = 1;
  long best_gap = -1;
  for (std::size_t h = 1; h <= 8 * d; ++h) {
    const long gap = std::labs(static_cast<long>(RecurrentPredictorParams(vocab, d, h)) - target);
    if (best_gap < 0 || gap < best_gap) {
      best_gap = gap;
      best = h;
    }
  }
  return best;
}

}  // namespace toktx::model
