// src/harness/training.cc
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

#include "toktx/harness/training.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

#include "toktx/decoder/decoder.h"
#include "toktx/grad/adam.h"
#include "toktx/grad/ops.h"

namespace toktx::harness {

namespace {

std::string Fmt(const char *fmt, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

double CosineLr(const ExperimentConfig &cfg, int step, int steps) {
  const double p = steps > 1 ? static_cast<double>(step) / (steps - 1) : 1.0;
  return cfg.lr_final + 0.5 * (cfg.lr - cfg.lr_final) * (1.0 + std::cos(std::numbers::pi * p));
}

struct DevResult {
  double nll_per_token = 0;
  double token_acc = 0;
};

DevResult EvaluateDev(const ExperimentConfig &cfg, const model::TokenTransducer &m,
                      const std::vector<CorpusRecord> &dev, const quantizer::Codebook &cb) {
  const std::size_t n = std::min<std::size_t>(dev.size(), cfg.dev_utts);
  std::vector<CorpusRecord> subset(dev.begin(), dev.begin() + n);
  const auto targets = TokenTargets(subset, cb);
  std::vector<const quantizer::FrameMatrix *> refs;
  for (const auto &r : subset) refs.push_back(&r.frames);
  DevResult out;
  out.nll_per_token = NllPerToken(m, subset, targets, refs);
  decoder::DecodeConfig greedy = cfg.decode;
  greedy.strategy = decoder::Strategy::kGreedy;
  metrics::EditOps ops;
  for (const auto &r : subset) ops += TokenEdits(decoder::Decode(m, r.text, r.frames, greedy).tokens, r, cb);
  out.token_acc = 1.0 - ops.Rate();
  return out;
}

}  // namespace

model::ModelConfig BuildModelConfig(const ExperimentConfig &cfg, std::uint64_t seed) {
  model::ModelConfig mc = cfg.model;
  mc.text_vocab = quantizer::kNumSymbols;
  mc.vocab = cfg.k;
  mc.feat_dim = cfg.feat_dim;
  mc.seed = seed;
  return mc;
}

std::vector<std::vector<int>> TokenTargets(const std::vector<CorpusRecord> &records,
                                           const quantizer::Codebook &cb) {
  std::vector<std::vector<int>> out;
  out.reserve(records.size());
  for (const auto &r : records) out.push_back(quantizer::Tokenize(r.frames, cb));
  return out;
}

quantizer::FrameMatrix CropReference(const quantizer::FrameMatrix &frames, int w, std::mt19937_64 &rng) {
  const auto width = static_cast<std::size_t>(w);
  if (frames.rows <= width) return frames;
  const std::size_t start = std::uniform_int_distribution<std::size_t>(0, frames.rows - width)(rng);
  return frames.Slice(start, start + width);
}

std::vector<std::size_t> GroupPartners(const std::vector<CorpusRecord> &records) {
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < records.size(); ++i) members[records[i].group].push_back(i);
  std::vector<std::size_t> partner(records.size());
  for (const auto &[group, idx] : members) {
    if (idx.size() < 2)
      throw HarnessError("config", "rate group " + std::to_string(group) + " has a single utterance");
    for (std::size_t k = 0; k < idx.size(); ++k) partner[idx[k]] = idx[(k + 1) % idx.size()];
  }
  return partner;
}

metrics::EditOps TokenEdits(std::span<const int> decoded, const CorpusRecord &rec,
                            const quantizer::Codebook &cb) {
  std::vector<int> mapped(decoded.begin(), decoded.end());
  if (!cb.label_map.empty())
    for (int &t : mapped) t = cb.label_map.at(t);
  return metrics::LevenshteinOps(std::span<const int>(rec.gold), std::span<const int>(mapped));
}

double NllPerToken(const model::TokenTransducer &m, const std::vector<CorpusRecord> &records,
                   const std::vector<std::vector<int>> &targets,
                   std::span<const quantizer::FrameMatrix *const> refs) {
  double nll = 0.0, tokens = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    nll += m.Nll(records[i].text, targets[i], *refs[i]);
    tokens += static_cast<double>(targets[i].size());
  }
  return nll / tokens;
}

TrainSummary TrainModel(const ExperimentConfig &cfg, model::TokenTransducer &m,
                        const std::vector<CorpusRecord> &train, const std::vector<CorpusRecord> &dev,
                        const quantizer::Codebook &cb, const TrainRun &run, std::ostream *progress) {
  if (train.empty()) throw HarnessError("missing", "empty training split");
  const auto targets = TokenTargets(train, cb);
  auto params = m.params().tensors();
  grad::Adam adam(params, {cfg.lr, 0.9, 0.98, 1e-9});
  std::mt19937_64 rng(run.seed * 0x9E3779B97F4A7C15ULL + 17);
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);

  std::string log = "step,lr,alpha2,loss,nll_per_token,simple_nll_per_token,grad_norm\n";
  std::string dev_log = "step,dev_nll_per_token,dev_token_acc\n";
  TrainSummary summary;
  const int warm = static_cast<int>(std::ceil(cfg.alpha2_warmup * run.steps));

  auto checkpoint = [&] {
    if (!run.checkpoint.empty()) {
      EnsureParentDir(run.checkpoint);
      m.Save(run.checkpoint + ".tmp");
      std::rename((run.checkpoint + ".tmp").c_str(), run.checkpoint.c_str());
    }
  };
  auto flush_logs = [&] {
    if (!run.log_csv.empty()) WriteText(run.log_csv, log);
    if (!run.dev_csv.empty()) WriteText(run.dev_csv, dev_log);
  };

  for (int step = 0; step < run.steps; ++step) {
    const double lr = CosineLr(cfg, step, run.steps);
    adam.set_lr(lr);
    model::LossOptions lo;
    lo.mode = cfg.mode;
    lo.S = cfg.S;
    lo.alpha1 = cfg.alpha1;
    lo.alpha2 = warm > 0 ? cfg.alpha2 * std::min(1.0, static_cast<double>(step + 1) / warm) : cfg.alpha2;

    adam.ZeroGrad();
    grad::Tensor total;
    double nll = 0.0, simple = 0.0, tokens = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      const std::size_t i = pick(rng);
      const auto &rec = train[i];
      const auto ref = run.reference == ReferenceMode::kCrop ? CropReference(rec.frames, cfg.crop, rng)
                                                             : rec.frames;
      auto out = m.Loss(rec.text, targets[i], ref, lo);
      const std::uint64_t U = rec.text.size(), T = targets[i].size();
      const std::uint64_t bound = cfg.mode == model::LossMode::kPruned ? U * out.bounds.S : U * (T + 1);
      if (out.joint_nodes > bound)
        throw HarnessError("internal", "joint network evaluated " + std::to_string(out.joint_nodes) +
                                           " nodes, bound " + std::to_string(bound));
      summary.max_joint_nodes = std::max(summary.max_joint_nodes, out.joint_nodes);
      total = total.defined() ? grad::Add(total, out.loss) : out.loss;
      nll += out.transducer_nll;
      simple += out.simple_nll;
      tokens += static_cast<double>(T);
    }
    total = grad::Scale(total, 1.0 / cfg.batch);
    const double loss = total.item();
    double norm = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(loss)) {
      grad::Backward(total);
      norm = grad::ClipGradNorm(params, cfg.clip);
    }
    if (!std::isfinite(loss) || !std::isfinite(norm)) {
      checkpoint();
      flush_logs();
      throw HarnessError("diverged", "non-finite " + std::string(std::isfinite(loss) ? "gradient" : "loss") +
                                         " at step " + std::to_string(step + 1) +
                                         (run.checkpoint.empty() ? "" : "; last good model in " + run.checkpoint));
    }
    adam.Step();
    summary.steps = step + 1;
    summary.last_loss = loss;

    if ((step + 1) % cfg.log_every == 0 || step + 1 == run.steps) {
      log += std::to_string(step + 1) + "," + Fmt("%.6g", lr) + "," + Fmt("%.6g", lo.alpha2) + "," +
             Fmt("%.6f", loss) + "," + Fmt("%.6f", nll / tokens) + "," + Fmt("%.6f", simple / tokens) + "," +
             Fmt("%.6f", norm) + "\n";
    }
    if ((step + 1) % cfg.dev_every == 0 || step + 1 == run.steps) {
      if (!dev.empty()) {
        const auto d = EvaluateDev(cfg, m, dev, cb);
        summary.dev_nll_per_token = d.nll_per_token;
        summary.dev_token_acc = d.token_acc;
        dev_log += std::to_string(step + 1) + "," + Fmt("%.6f", d.nll_per_token) + "," +
                   Fmt("%.6f", d.token_acc) + "\n";
        if (progress)
          *progress << "step " << step + 1 << "/" << run.steps << " loss " << Fmt("%.4f", loss)
                    << " dev nll/token " << Fmt("%.4f", d.nll_per_token) << " dev token acc "
                    << Fmt("%.4f", d.token_acc) << std::endl;
      }
      checkpoint();
      flush_logs();
    }
  }
  return summary;
}

}  // namespace toktx::harness
