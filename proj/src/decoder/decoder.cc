// src/decoder/decoder.cc
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

#include "toktx/decoder/decoder.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "toktx/grad/ops.h"

namespace toktx::decoder {

void DecodeConfig::Validate() const {
  if (k < 1) throw std::invalid_argument("decode: k must be >= 1");
  if (!(temperature > 0.0)) throw std::invalid_argument("decode: temperature must be positive");
  if (max_tokens_per_input < 1) throw std::invalid_argument("decode: max_tokens_per_input must be >= 1");
}

ModelSession::ModelSession(const model::TokenTransducer &m, std::span<const int> text,
                           const quantizer::FrameMatrix &ref)
    : m_(m), U_(static_cast<int>(text.size())) {
  grad::NoGradGuard ng;
  h_in_ = m.EncodeText(text);
  cond_ = m.joint().Condition(m.EncodeReference(ref));
  const auto before = grad::MacCount();
  state_ = m.predictor().Start(&h_out_row_);
  pred_macs_ += grad::MacCount() - before;
}

std::vector<double> ModelSession::NodeLogProbs(int u) {
  grad::NoGradGuard ng;
  grad::Tensor z = grad::Add(grad::Slice(h_in_, 0, u, u + 1), h_out_row_);
  grad::Tensor lp = m_.joint().Forward(z, cond_);
  return {lp.data().begin(), lp.data().end()};
}

void ModelSession::Emit(int token) {
  grad::NoGradGuard ng;
  const auto before = grad::MacCount();
  h_out_row_ = m_.predictor().Step(*state_, token);
  pred_macs_ += grad::MacCount() - before;
}

namespace {

int Argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Samples among the k largest entries of `cand` (indices into logp) after
// tempering and renormalizing.
int SampleTopK(std::span<const double> logp, std::vector<int> cand, int k, double temperature,
               std::mt19937_64 &rng) {
  std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return logp[a] > logp[b]; });
  cand.resize(std::min<std::size_t>(k, cand.size()));
  const double top = logp[cand[0]];
  std::vector<double> w(cand.size());
  double total = 0.0;
  for (std::size_t i = 0; i < cand.size(); ++i) total += w[i] = std::exp((logp[cand[i]] - top) / temperature);
  double r = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (r < w[i]) return cand[i];
    r -= w[i];
  }
  return cand[0];
}

}  // namespace

DecodeResult Decode(DecodeSession &session, const DecodeConfig &cfg) {
  cfg.Validate();
  const int U = session.U(), V = session.V(), blank = V;
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> all(V + 1);
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> emissions(all.begin(), all.end() - 1);

  DecodeResult res;
  std::vector<int> steps;
  double total = 0.0;
  for (int u = 0; u < U;) {
    int emitted_here = 0;
    for (;;) {
      const auto logp = session.NodeLogProbs(u);
      int pick = 0;
      if (cfg.strategy == Strategy::kGreedy) {
        pick = Argmax(logp);
      } else if (!cfg.sample_blank && Argmax(logp) == blank) {
        pick = blank;
      } else {
        pick = SampleTopK(logp, cfg.sample_blank ? all : emissions, cfg.k, cfg.temperature, rng);
      }
      if (pick != blank && emitted_here >= cfg.max_tokens_per_input) {
        pick = blank;
        res.truncated = true;
      }
      res.step_log_probs.push_back(logp[pick]);
      total += logp[pick];
      if (pick == blank) {
        steps.push_back(lattice::AlignmentPath::kBlank);
        break;
      }
      steps.push_back(pick);
      res.tokens.push_back(pick);
      session.Emit(pick);
      ++emitted_here;
    }
    ++u;
  }
  res.alignment = lattice::PathFromSteps(U, static_cast<int>(res.tokens.size()), steps);
  res.alignment.log_prob = total;
  return res;
}

DecodeResult Decode(const model::TokenTransducer &m, std::span<const int> text,
                    const quantizer::FrameMatrix &ref, const DecodeConfig &cfg) {
  ModelSession session(m, text, ref);
  return Decode(session, cfg);
}

TimedBatch BatchDecodeTimed(const model::TokenTransducer &m, std::span<const DecodeInput> inputs,
                            const DecodeConfig &cfg) {
  if (inputs.empty()) throw std::invalid_argument("batch decode: no inputs");
  TimedBatch out;
  const std::string variant = model::PredictorName(m.config().predictor);
  for (const auto &in : inputs) {
    const auto start = std::chrono::steady_clock::now();
    ModelSession session(m, in.text, in.ref);
    DecodeResult r = Decode(session, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    TimingRow row;
    row.variant = variant;
    row.U = static_cast<int>(in.text.size());
    row.T = static_cast<int>(r.tokens.size());
    row.wall_ms = secs * 1e3;
    row.tokens_per_s = secs > 0 ? r.tokens.size() / secs : 0.0;
    row.step_ops = static_cast<double>(session.predictor_macs()) / session.predictor_steps();
    out.timing.push_back(row);
    out.results.push_back(std::move(r));
  }
  return out;
}

std::string TimingCsv(std::span<const TimingRow> rows) {
  std::ostringstream os;
  os.precision(6);
  os << "variant,U,T,wall_ms,tokens_per_s,step_ops\n";
  for (const auto &r : rows)
    os << r.variant << ',' << r.U << ',' << r.T << ',' << r.wall_ms << ',' << r.tokens_per_s << ','
       << r.step_ops << '\n';
  return os.str();
}

}  // namespace toktx::decoder
