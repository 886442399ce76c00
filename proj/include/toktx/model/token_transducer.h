// include/toktx/model/token_transducer.h
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

#ifndef TOKTX_MODEL_TOKEN_TRANSDUCER_H_
#define TOKTX_MODEL_TOKEN_TRANSDUCER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "toktx/lattice/lattice.h"
#include "toktx/lattice/prune.h"
#include "toktx/model/joint_network.h"
#include "toktx/model/prediction_network.h"
#include "toktx/model/reference_encoder.h"
#include "toktx/model/text_encoder.h"
#include "toktx/quantizer/codebook.h"

namespace toktx::model {

struct ModelConfig {
  int text_vocab = 16;
  int vocab = 32;  // V, semantic tokens (codebook size)
  int feat_dim = 16;
  int d = 32;
  int d_ref = 16;
  int heads = 2;
  int text_layers = 2;
  int pred_layers = 2;
  int ff = 64;
  int joint_blocks = 3;
  int joint_ff = 64;
  int lstm_hidden = 0;  // 0 = match the attention predictor's parameter count
  PredictorKind predictor = PredictorKind::kRecurrent;
  bool cond_shift = true;
  std::uint64_t seed = 1;

  // The LSTM width actually used.
  int ResolvedLstmHidden() const;
};

enum class LossMode { kExact, kPruned };

struct LossOptions {
  LossMode mode = LossMode::kPruned;
  int S = 8;
  double alpha1 = 0.5;  // simple-lattice weight
  double alpha2 = 1.0;  // transducer weight
};

struct LossOutput {
  grad::Tensor loss;           // differentiable scalar
  double transducer_nll = 0;   // -log P(y|x, ref) (pruned region in pruned mode)
  double simple_nll = 0;       // pruned mode only
  lattice::PruneBounds bounds;  // pruned mode only
  std::uint64_t joint_nodes = 0;
};

// Text encoder, prediction network, reference encoder and joint network,
// with the exact and pruned transducer objectives.
class TokenTransducer {
 public:
  explicit TokenTransducer(const ModelConfig &cfg);
  TokenTransducer(const TokenTransducer &) = delete;
  TokenTransducer &operator=(const TokenTransducer &) = delete;

  const ModelConfig &config() const { return cfg_; }
  grad::ParameterSet &params() { return params_; }
  const grad::ParameterSet &params() const { return params_; }

  grad::Tensor EncodeText(std::span<const int> text) const { return text_.Forward(text); }
  grad::Tensor EncodeReference(const quantizer::FrameMatrix &ref) const { return ref_.Forward(ref); }
  grad::Tensor Predict(std::span<const int> y) const { return pred_->Forward(y); }

  // Exact mode: alpha2 * (-log P).  Pruned mode: alpha1 * simple loss +
  // alpha2 * pruned loss.
  LossOutput Loss(std::span<const int> text, std::span<const int> y,
                  const quantizer::FrameMatrix &ref, const LossOptions &opts) const;

  // Dense lattice values without grad recording.
  lattice::JointLogProbs Lattice(std::span<const int> text, std::span<const int> y,
                                 const quantizer::FrameMatrix &ref) const;
  // Exact -log P(y|x, ref) without grad recording.
  double Nll(std::span<const int> text, std::span<const int> y,
             const quantizer::FrameMatrix &ref) const;

  const TextEncoder &text_encoder() const { return text_; }
  const ReferenceEncoder &reference_encoder() const { return ref_; }
  const PredictionNetwork &predictor() const { return *pred_; }
  const JointNetwork &joint() const { return joint_; }
  JointNetwork &joint() { return joint_; }

  // Checkpoint with the architecture stored alongside the parameters.
  void Save(const std::string &path) const;
  static std::unique_ptr<TokenTransducer> Load(const std::string &path);

 private:
  ModelConfig cfg_;
  grad::ParameterSet params_;
  TextEncoder text_;
  ReferenceEncoder ref_;
  std::unique_ptr<PredictionNetwork> pred_;
  JointNetwork joint_;
  Linear simple_enc_, simple_pred_;
};

}  // namespace toktx::model

#endif  // TOKTX_MODEL_TOKEN_TRANSDUCER_H_
