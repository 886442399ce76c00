// include/toktx/decoder/decoder.h
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

#ifndef TOKTX_DECODER_DECODER_H_
#define TOKTX_DECODER_DECODER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "toktx/lattice/lattice.h"
#include "toktx/model/token_transducer.h"
#include "toktx/quantizer/codebook.h"

namespace toktx::decoder {

enum class Strategy { kGreedy, kTopK };

struct DecodeConfig {
  Strategy strategy = Strategy::kGreedy;
  int k = 5;
  double temperature = 1.0;
  int max_tokens_per_input = 8;
  std::uint64_t seed = 0;
  // When false, blank is taken whenever it is the most likely outcome and
  // only emissions are sampled.
  bool sample_blank = true;

  // Throws std::invalid_argument on k < 1, temperature <= 0 or a
  // non-positive guard.
  void Validate() const;
};

struct DecodeResult {
  std::vector<int> tokens;
  lattice::AlignmentPath alignment;
  std::vector<double> step_log_probs;  // log-prob of each chosen outcome
  // Set when an input asked for more than max_tokens_per_input emissions and
  // blank was forced instead.
  bool truncated = false;
};

// The decoder's view of a model: log-probabilities over V tokens plus blank
// (last) at the current node, given the tokens emitted so far.
class DecodeSession {
 public:
  virtual ~DecodeSession() = default;
  virtual int U() const = 0;
  virtual int V() const = 0;
  virtual std::vector<double> NodeLogProbs(int u) = 0;
  // Called after each emission.
  virtual void Emit(int token) = 0;
};

// Session over a TokenTransducer; the prediction network advances through
// its step interface, one call per emitted token.
class ModelSession : public DecodeSession {
 public:
  ModelSession(const model::TokenTransducer &m, std::span<const int> text,
               const quantizer::FrameMatrix &ref);

  int U() const override { return U_; }
  int V() const override { return m_.config().vocab; }
  std::vector<double> NodeLogProbs(int u) override;
  void Emit(int token) override;

  // Multiply-accumulates spent inside the prediction network so far.
  std::uint64_t predictor_macs() const { return pred_macs_; }
  std::size_t predictor_steps() const { return state_->steps(); }

 private:
  const model::TokenTransducer &m_;
  int U_;
  grad::Tensor h_in_, h_out_row_;
  model::JointNetwork::Conditioning cond_;
  std::unique_ptr<model::PredictorState> state_;
  std::uint64_t pred_macs_ = 0;
};

// Starts at (u=1, t=0) and repeats: choose an outcome at the current node;
// blank moves to the next input, a token is appended and the output advances.
// Stops after the blank that leaves the last input.
DecodeResult Decode(DecodeSession &session, const DecodeConfig &cfg);
DecodeResult Decode(const model::TokenTransducer &m, std::span<const int> text,
                    const quantizer::FrameMatrix &ref, const DecodeConfig &cfg);

struct DecodeInput {
  std::vector<int> text;
  quantizer::FrameMatrix ref;
};

struct TimingRow {
  std::string variant;
  int U = 0;
  int T = 0;
  double wall_ms = 0;
  double tokens_per_s = 0;
  double step_ops = 0;  // prediction-network multiply-accumulates per step
};

struct TimedBatch {
  std::vector<DecodeResult> results;
  std::vector<TimingRow> timing;
};

// Decodes each input in turn, timing it with a steady clock.  Throws
// std::invalid_argument on an empty input list.
TimedBatch BatchDecodeTimed(const model::TokenTransducer &m, std::span<const DecodeInput> inputs,
                            const DecodeConfig &cfg);

// Header: variant,U,T,wall_ms,tokens_per_s,step_ops
std::string TimingCsv(std::span<const TimingRow> rows);

}  // namespace toktx::decoder

#endif  // TOKTX_DECODER_DECODER_H_
