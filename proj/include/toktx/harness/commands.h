// include/toktx/harness/commands.h
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

#ifndef TOKTX_HARNESS_COMMANDS_H_
#define TOKTX_HARNESS_COMMANDS_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "toktx/harness/config.h"
#include "toktx/harness/training.h"
#include "toktx/metrics/edit_ops.h"
#include "toktx/quantizer/codebook.h"

// The subcommands.  Each validates the config, writes a resolved-config
// snapshot beside its outputs (<output dir>/<command>.config), writes its
// reports as CSV and returns the headline numbers.  Failures are raised as
// HarnessError.
namespace toktx::harness {

// Train/dev/test splits; test rate groups never occur in train or dev.
// An existing corpus is replaced only with `force`.
void CmdGenData(const ExperimentConfig &cfg, bool force, std::ostream &log);

// k-means on the training frames; the label map records the majority gold
// unit of every cluster.
quantizer::Codebook CmdFitKmeans(const ExperimentConfig &cfg, std::ostream &log);

TrainSummary CmdTrain(const ExperimentConfig &cfg, std::ostream &log);

struct EvalSummary {
  int utterances = 0;
  metrics::EditOps token;   // decoded units vs gold units
  metrics::EditOps symbol;  // recovered text vs input text
  int truncated = 0;
};
EvalSummary CmdDecodeEval(const ExperimentConfig &cfg, std::ostream &log);

struct VizSummary {
  int U = 0;
  int T = 0;
  double log_z = 0;
  double start_occupancy = 0;  // node (1, 0)
  double end_occupancy = 0;    // node (U, T)
  bool mask_valid = false;
  // Fraction of decoded path nodes inside each row's 0.99-mass region.
  double coverage = 0;
  std::vector<std::string> files;
};
VizSummary CmdViz(const ExperimentConfig &cfg, std::ostream &log);

struct AblationRow {
  std::uint64_t seed = 0;
  ReferenceMode reference = ReferenceMode::kCrop;
  double nll_matched = 0;  // per target token
  double nll_mismatched = 0;
  double cer_matched = 0;
  double cer_mismatched = 0;
  double Gap() const { return nll_mismatched - nll_matched; }
};
struct AblationSummary {
  std::vector<AblationRow> runs;
  AblationRow full;  // means over seeds
  AblationRow crop;
};
AblationSummary CmdAblateCrop(const ExperimentConfig &cfg, std::ostream &log);

// Correlations are within text: rates and counts are centred per text
// before pooling.  The pooled_* values skip the centring.
struct RateSummary {
  double pearson_trained = 0;
  double pearson_untrained = 0;
  double pooled_trained = 0;
  double pooled_untrained = 0;
  double constant_rate_cv = 0;  // mean over texts
};
RateSummary CmdRateControl(const ExperimentConfig &cfg, std::ostream &log);

// Pearson correlation; NaN when either side has zero variance.
double Pearson(std::span<const double> x, std::span<const double> y);

}  // namespace toktx::harness

#endif  // TOKTX_HARNESS_COMMANDS_H_
