// src/model/token_transducer.cc
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

#include "toktx/model/token_transducer.h"

#include <random>
#include <stdexcept>

#include "toktx/grad/checkpoint.h"
#include "toktx/grad/ops.h"

namespace toktx::model {

using namespace toktx::grad;

int ModelConfig::ResolvedLstmHidden() const {
  if (lstm_hidden > 0) return lstm_hidden;
  return static_cast<int>(MatchedLstmHidden(vocab, d, pred_layers, ff));
}

TokenTransducer::TokenTransducer(const ModelConfig &cfg) : cfg_(cfg) {
  if (cfg.vocab < 1 || cfg.text_vocab < 1 || cfg.d < 1 || cfg.d_ref < 1 || cfg.feat_dim < 1)
    throw std::invalid_argument("model config: sizes must be positive");
  std::mt19937_64 rng(cfg.seed);
  const auto d = static_cast<std::size_t>(cfg.d);
  text_ = TextEncoder(params_, cfg.text_vocab, d, cfg.heads, cfg.text_layers, cfg.ff, rng);
  ref_ = ReferenceEncoder(params_, cfg.feat_dim, cfg.d_ref, rng);
  if (cfg.predictor == PredictorKind::kRecurrent)
    pred_ = std::make_unique<RecurrentPredictor>(params_, cfg.vocab, d, cfg.ResolvedLstmHidden(), rng);
  else
    pred_ = std::make_unique<AttentionPredictor>(params_, cfg.vocab, d, cfg.heads, cfg.pred_layers,
                                                 cfg.ff, rng);
  joint_ = JointNetwork(params_, d, cfg.d_ref, cfg.vocab + 1, cfg.joint_ff, cfg.joint_blocks,
                        cfg.cond_shift, rng);
  simple_enc_ = Linear(params_, "simple.enc", d, cfg.vocab + 1, rng);
  simple_pred_ = Linear(params_, "simple.pred", d, cfg.vocab + 1, rng);
}

LossOutput TokenTransducer::Loss(std::span<const int> text, std::span<const int> y,
                                 const quantizer::FrameMatrix &ref, const LossOptions &opts) const {
  Tensor h_in = EncodeText(text);
  Tensor h_out = Predict(y);
  const auto cond = joint_.Condition(EncodeReference(ref));
  const std::uint64_t nodes_before = joint_.nodes_evaluated();
  const int U = static_cast<int>(text.size()), T = static_cast<int>(y.size());

  LossOutput out;
  if (opts.mode == LossMode::kExact) {
    Tensor ll = lattice::TransducerLogLikelihood(joint_.Dense(h_in, h_out, cond), y);
    out.transducer_nll = -ll.item();
    out.loss = Scale(ll, -opts.alpha2);
  } else {
    auto simple = lattice::SimpleLossAndBounds(simple_enc_(h_in), simple_pred_(h_out), y, opts.S);
    const auto &b = simple.bounds;
    std::vector<int> us, ts;
    for (int u = 0; u < U; ++u)
      for (int s = 0; s < b.S; ++s) {
        us.push_back(u);
        ts.push_back(b.lo[u] + s);
      }
    Tensor logp = Reshape(joint_.Nodes(h_in, h_out, cond, us, ts),
                          {static_cast<std::size_t>(U), static_cast<std::size_t>(b.S),
                           static_cast<std::size_t>(cfg_.vocab + 1)});
    Tensor ll = lattice::PrunedLogLikelihood(logp, b, T, y);
    out.transducer_nll = -ll.item();
    out.simple_nll = simple.loss.item();
    out.bounds = b;
    out.loss = Sub(Scale(simple.loss, opts.alpha1), Scale(ll, opts.alpha2));
  }
  out.joint_nodes = joint_.nodes_evaluated() - nodes_before;
  return out;
}

lattice::JointLogProbs TokenTransducer::Lattice(std::span<const int> text, std::span<const int> y,
                                                const quantizer::FrameMatrix &ref) const {
  NoGradGuard no_grad;
  Tensor dense = joint_.Dense(EncodeText(text), Predict(y), joint_.Condition(EncodeReference(ref)));
  return lattice::JointLogProbs::FromDense(dense.data(), static_cast<int>(text.size()),
                                           static_cast<int>(y.size()), cfg_.vocab);
}

double TokenTransducer::Nll(std::span<const int> text, std::span<const int> y,
                            const quantizer::FrameMatrix &ref) const {
  return -lattice::ForwardLoss(Lattice(text, y, ref), y).log_z;
}

namespace {

constexpr const char *kConfigTensor = "model.config";

std::vector<double> PackConfig(const ModelConfig &c) {
  return {static_cast<double>(c.text_vocab), static_cast<double>(c.vocab),
          static_cast<double>(c.feat_dim),   static_cast<double>(c.d),
          static_cast<double>(c.d_ref),      static_cast<double>(c.heads),
          static_cast<double>(c.text_layers), static_cast<double>(c.pred_layers),
          static_cast<double>(c.ff),         static_cast<double>(c.joint_blocks),
          static_cast<double>(c.joint_ff),   static_cast<double>(c.ResolvedLstmHidden()),
          c.predictor == PredictorKind::kRecurrent ? 0.0 : 1.0,
          c.cond_shift ? 1.0 : 0.0,          static_cast<double>(c.seed)};
}

ModelConfig UnpackConfig(std::span<const double> v) {
  if (v.size() != 15) throw std::runtime_error("checkpoint: malformed model config");
  ModelConfig c;
  auto i = [&](int k) { return static_cast<int>(v[k]); };
  c.text_vocab = i(0);
  c.vocab = i(1);
  c.feat_dim = i(2);
  c.d = i(3);
  c.d_ref = i(4);
  c.heads = i(5);
  c.text_layers = i(6);
  c.pred_layers = i(7);
  c.ff = i(8);
  c.joint_blocks = i(9);
  c.joint_ff = i(10);
  c.lstm_hidden = i(11);
  c.predictor = v[12] == 0.0 ? PredictorKind::kRecurrent : PredictorKind::kCausalAttention;
  c.cond_shift = v[13] != 0.0;
  c.seed = static_cast<std::uint64_t>(v[14]);
  return c;
}

}  // namespace

void TokenTransducer::Save(const std::string &path) const {
  NamedTensors t;
  auto packed = PackConfig(cfg_);
  t.emplace_back(kConfigTensor, Tensor({packed.size()}, packed));
  for (const auto &[name, p] : params_.items()) t.emplace_back(name, p.Detach());
  SaveTensors(path, t);
}

std::unique_ptr<TokenTransducer> TokenTransducer::Load(const std::string &path) {
  auto t = LoadTensors(path);
  auto model = std::make_unique<TokenTransducer>(UnpackConfig(FindTensor(t, kConfigTensor).data()));
  NamedTensors params;
  for (auto &[name, v] : t)
    if (name != kConfigTensor) params.emplace_back(name, v);
  model->params_.CopyValuesFrom(params);
  return model;
}

}  // namespace toktx::model
