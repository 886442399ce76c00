// include/toktx/model/prediction_network.h
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

#ifndef TOKTX_MODEL_PREDICTION_NETWORK_H_
#define TOKTX_MODEL_PREDICTION_NETWORK_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "toktx/model/layers.h"

namespace toktx::model {

enum class PredictorKind { kRecurrent, kCausalAttention };

std::string PredictorName(PredictorKind kind);
// Accepts "recurrent"/"lstm" and "attention"/"causal-attention".
PredictorKind ParsePredictor(const std::string &name);

// Decoding state private to one session.
class PredictorState {
 public:
  virtual ~PredictorState() = default;
  // Output rows produced so far.
  virtual std::size_t steps() const = 0;
};

// Maps the <SOS>-prefixed history to h_out: row t depends on y_1 .. y_t only.
class PredictionNetwork {
 public:
  virtual ~PredictionNetwork() = default;

  // [T] tokens -> [T+1, D]; row 0 is the <SOS> row.  Throws std::out_of_range
  // for tokens outside [0, V).
  virtual Tensor Forward(std::span<const int> y) const = 0;

  // Incremental interface: Start() consumes <SOS> and returns row 0 in
  // `out`; each Step() consumes one token and returns the next row.
  virtual std::unique_ptr<PredictorState> Start(Tensor *out) const = 0;
  virtual Tensor Step(PredictorState &state, int token) const = 0;

  virtual PredictorKind kind() const = 0;
};

// Two LSTM layers followed by a projection back to width D.
class RecurrentPredictor : public PredictionNetwork {
 public:
  RecurrentPredictor(ParameterSet &ps, std::size_t vocab, std::size_t d, std::size_t hidden,
                     std::mt19937_64 &rng);

  Tensor Forward(std::span<const int> y) const override;
  std::unique_ptr<PredictorState> Start(Tensor *out) const override;
  Tensor Step(PredictorState &state, int token) const override;
  PredictorKind kind() const override { return PredictorKind::kRecurrent; }

 private:
  Tensor Embed(std::span<const int> ids) const;

  std::size_t vocab_;
  Tensor embedding_;  // [vocab + 1, d], last row is <SOS>
  LstmLayer lstm1_, lstm2_;
  Linear proj_;
};

// Causally masked attention blocks; the step interface keeps a key/value
// cache, so the work of step t grows with t.
class AttentionPredictor : public PredictionNetwork {
 public:
  AttentionPredictor(ParameterSet &ps, std::size_t vocab, std::size_t d, std::size_t heads,
                     std::size_t layers, std::size_t ff, std::mt19937_64 &rng);

  Tensor Forward(std::span<const int> y) const override;
  std::unique_ptr<PredictorState> Start(Tensor *out) const override;
  Tensor Step(PredictorState &state, int token) const override;
  PredictorKind kind() const override { return PredictorKind::kCausalAttention; }

 private:
  Tensor Embed(std::span<const int> ids, std::size_t offset) const;

  std::size_t vocab_, d_;
  Tensor embedding_;
  std::vector<AttentionBlock> blocks_;
  AffineLayerNorm final_ln_;
};

// Predictor parameter count for the given widths (embedding included).
std::size_t RecurrentPredictorParams(std::size_t vocab, std::size_t d, std::size_t hidden);
std::size_t AttentionPredictorParams(std::size_t vocab, std::size_t d, std::size_t layers,
                                     std::size_t ff);
// LSTM hidden width whose parameter count is closest to the attention
// predictor's.
std::size_t MatchedLstmHidden(std::size_t vocab, std::size_t d, std::size_t layers, std::size_t ff);

}  // namespace toktx::model

#endif  // TOKTX_MODEL_PREDICTION_NETWORK_H_
