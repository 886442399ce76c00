// include/toktx/harness/corpus_io.h
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

#ifndef TOKTX_HARNESS_CORPUS_IO_H_
#define TOKTX_HARNESS_CORPUS_IO_H_

#include <string>
#include <vector>

#include "toktx/harness/config.h"
#include "toktx/quantizer/codebook.h"
#include "toktx/quantizer/synthetic_corpus.h"

// On-disk corpus layout:
//   <dir>/meta             key = value lines (feat_dim, grammar_seed, ...)
//   <dir>/<split>.tsv      one utterance per line:
//                          id  group  rate  text  gold_tokens  frames_file  rows
//                          (sequences are space-separated integers)
//   <dir>/frames/<id>.f64  rows * feat_dim little-endian doubles
namespace toktx::harness {

struct CorpusRecord {
  std::string id;
  int group = 0;  // speaker-rate group: regime * rate_bins + bin
  double rate = 1.0;
  std::vector<int> text;
  std::vector<int> gold;  // generating unit per frame
  std::string frames_file;  // relative to the corpus directory
  quantizer::FrameMatrix frames;
};

struct CorpusMeta {
  int feat_dim = 16;
  std::uint64_t grammar_seed = 7;
  int rate_bins = 6;
};

// Rate intervals of each regime's train/dev bins and test bins, with the
// group id of every interval.
struct RateSplit {
  std::vector<quantizer::RateInterval> train, test;
  std::vector<int> train_groups, test_groups;
};
RateSplit SplitRates(const ExperimentConfig &cfg);
// Group of `rate`, or -1 when it falls in no bin.
int RateGroup(const ExperimentConfig &cfg, double rate);

void WriteCorpusMeta(const std::string &dir, const CorpusMeta &meta);
CorpusMeta ReadCorpusMeta(const std::string &dir);

void WriteSplit(const std::string &dir, const std::string &split,
                const std::vector<CorpusRecord> &records);
// Throws HarnessError("missing") when the split is absent and
// HarnessError("io") on a malformed line or frame file.
std::vector<CorpusRecord> ReadSplit(const std::string &dir, const std::string &split);

// All frames of `records` stacked in order.
quantizer::FrameMatrix StackFrames(const std::vector<CorpusRecord> &records);

// Writes `contents` to `path`, creating parent directories.
void WriteText(const std::string &path, const std::string &contents);
void EnsureParentDir(const std::string &path);

}  // namespace toktx::harness

#endif  // TOKTX_HARNESS_CORPUS_IO_H_
