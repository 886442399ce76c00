// include/toktx/harness/config.h
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

#ifndef TOKTX_HARNESS_CONFIG_H_
#define TOKTX_HARNESS_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "toktx/decoder/decoder.h"
#include "toktx/model/token_transducer.h"

namespace toktx::harness {

// Failure with a short machine-readable tag; the CLI prints
// "error: <tag>: <message>" and exits with ExitCode().
class HarnessError : public std::runtime_error {
 public:
  HarnessError(std::string tag, const std::string &message)
      : std::runtime_error(message), tag_(std::move(tag)) {}
  const std::string &tag() const { return tag_; }
  int ExitCode() const;

 private:
  std::string tag_;
};

// Where a training sample's reference comes from.
enum class ReferenceMode {
  kCrop,  // random W-frame window of the target's own frames
  kFull,  // all of the target's frames
};

std::string ReferenceModeName(ReferenceMode m);

struct ExperimentConfig {
  // experiment.*
  std::string tag = "default";
  std::uint64_t seed = 1;

  // paths.*
  std::string corpus_dir = "run/corpus";
  std::string codebook = "run/codebook.bin";
  std::string checkpoint = "run/model.ckpt";
  std::string reports = "run/reports";

  // data.*
  int n_train = 2000;
  int n_dev = 200;
  int n_test = 200;
  int min_text_len = 3;
  int max_text_len = 8;
  double noise_sigma = 0.1;
  std::uint64_t grammar_seed = 7;
  int feat_dim = 16;
  std::vector<double> rate_centers{1.0, 2.0};
  double rate_half_width = 0.15;
  int rate_bins = 6;
  std::vector<int> test_bins{1, 4};  // held out of train/dev in every regime

  // kmeans.*
  int k = 32;
  int kmeans_iters = 100;
  int kmeans_restarts = 8;

  // model.*  (model.vocab follows kmeans.k)
  model::ModelConfig model;

  // train.*
  int steps = 20000;
  int batch = 16;
  double lr = 1e-3;
  double lr_final = 1e-4;  // cosine decay target
  double clip = 5.0;
  model::LossMode mode = model::LossMode::kPruned;
  int S = 8;
  double alpha1 = 0.5;
  double alpha2 = 1.0;
  double alpha2_warmup = 0.1;  // fraction of steps over which alpha2 ramps up
  ReferenceMode reference = ReferenceMode::kCrop;
  int crop = 12;  // W
  int log_every = 10;
  int dev_every = 2000;
  int dev_utts = 100;

  // decode.*
  decoder::DecodeConfig decode;
  // eval.*
  bool eval_own_reference = true;  // false: reference from another utterance of the group

  // viz.*
  std::string viz_split = "test";
  std::string viz_utt = "test-0000";

  // ablate.*
  std::vector<std::uint64_t> ablate_seeds{1, 2, 3};
  int ablate_steps = 1500;
  int ablate_eval_utts = 200;

  // rate.*
  int rate_texts = 8;
  int rate_points = 7;         // reference rates per regime
  int rate_constant_refs = 8;  // references per text in the constant-rate control
  int rate_k = 0;              // top-k for rate decoding, 0 = every outcome
};

// Reads "section.key = value" lines; '#' starts a comment.  Unknown keys and
// malformed values raise HarnessError("config").
ExperimentConfig ParseConfig(std::string_view text, ExperimentConfig base = {});
ExperimentConfig LoadConfig(const std::string &path);
void SetConfigValue(ExperimentConfig &cfg, std::string_view key, std::string_view value);

// Every key with its current value, one per line, in a fixed order.
// ParseConfig(ResolvedConfig(c)) == c.
std::string ResolvedConfig(const ExperimentConfig &cfg);
// Every key with its default value and a one-line description.
std::string ConfigReference();

// Checks ranges and cross-field constraints.
void ValidateConfig(const ExperimentConfig &cfg);

}  // namespace toktx::harness

#endif  // TOKTX_HARNESS_CONFIG_H_
