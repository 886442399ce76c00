// include/toktx/harness/training.h
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

#ifndef TOKTX_HARNESS_TRAINING_H_
#define TOKTX_HARNESS_TRAINING_H_

#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "toktx/harness/config.h"
#include "toktx/harness/corpus_io.h"
#include "toktx/metrics/edit_ops.h"
#include "toktx/model/token_transducer.h"

namespace toktx::harness {

// Model architecture for this experiment; the vocabulary is the codebook.
model::ModelConfig BuildModelConfig(const ExperimentConfig &cfg, std::uint64_t seed);

// Codebook indices of every record's frames (the training targets).
std::vector<std::vector<int>> TokenTargets(const std::vector<CorpusRecord> &records,
                                           const quantizer::Codebook &cb);

// A random window of `w` consecutive frames, or all frames when shorter.
quantizer::FrameMatrix CropReference(const quantizer::FrameMatrix &frames, int w, std::mt19937_64 &rng);

// For each record, the next record (cyclically) of the same rate group.
// Throws HarnessError("config") when a group has a single member.
std::vector<std::size_t> GroupPartners(const std::vector<CorpusRecord> &records);

// Edit operations of decoded codebook indices against the gold units, after
// mapping each index through the codebook's label map.
metrics::EditOps TokenEdits(std::span<const int> decoded, const CorpusRecord &rec,
                            const quantizer::Codebook &cb);

// Exact -log P summed over records, divided by the number of target tokens.
// refs[i] conditions record i.
double NllPerToken(const model::TokenTransducer &m, const std::vector<CorpusRecord> &records,
                   const std::vector<std::vector<int>> &targets,
                   std::span<const quantizer::FrameMatrix *const> refs);

struct TrainRun {
  int steps = 0;
  ReferenceMode reference = ReferenceMode::kCrop;
  std::uint64_t seed = 1;
  std::string checkpoint;  // written at each dev evaluation and at the end; empty = none
  std::string log_csv;     // per-step log; empty = none
  std::string dev_csv;     // dev evaluations; empty = none
};

struct TrainSummary {
  int steps = 0;
  double last_loss = 0;
  double dev_nll_per_token = 0;
  double dev_token_acc = 0;
  // Largest joint evaluation count seen for one utterance, and the bound it
  // was checked against (U*S pruned, U*(T+1) exact).
  std::uint64_t max_joint_nodes = 0;
};

// Adam with cosine learning-rate decay, gradient clipping and an alpha2
// warm-up.  A non-finite loss or gradient stops training: the parameters
// from before the failing step are saved to run.checkpoint and
// HarnessError("diverged") is thrown.
TrainSummary TrainModel(const ExperimentConfig &cfg, model::TokenTransducer &m,
                        const std::vector<CorpusRecord> &train, const std::vector<CorpusRecord> &dev,
                        const quantizer::Codebook &cb, const TrainRun &run, std::ostream *progress);

}  // namespace toktx::harness

#endif  // TOKTX_HARNESS_TRAINING_H_
