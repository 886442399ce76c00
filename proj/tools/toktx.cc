// tools/toktx.cc
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

// toktx: corpus generation, tokenizer fitting, training, evaluation and the
// ablation experiments of the token transducer.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "toktx/harness/commands.h"
#include "toktx/harness/config.h"

using namespace toktx::harness;

namespace {

std::string OneLine(std::string s) {
  for (char &c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Token transducer experiments on synthetic speech tokens"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool show_config = false;
  std::vector<std::string> overrides;
  std::string utt;
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--seed", seed, "overrides experiment.seed");
  app.add_flag("--force", force, "replace existing outputs");
  app.add_option("--set", overrides, "key=value override, repeatable");
  app.add_flag("--show-config", show_config, "print the resolved config and exit");

  auto *gen = app.add_subcommand("gen-data", "generate train/dev/test splits");
  auto *kmeans = app.add_subcommand("fit-kmeans", "fit the codebook on training frames");
  auto *train = app.add_subcommand("train", "train the token transducer");
  auto *eval = app.add_subcommand("decode-eval", "decode the test split and score it");
  auto *viz = app.add_subcommand("viz", "export lattice, occupancy and alignment matrices");
  viz->add_option("--utt", utt, "utterance id (overrides viz.utt)");
  auto *ablate = app.add_subcommand("ablate-crop", "full vs cropped reference training");
  auto *rate = app.add_subcommand("rate-control", "reference rate vs output length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << OneLine(e.what()) << "\n";
    return HarnessError("usage", "").ExitCode();
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : LoadConfig(config_path);
    for (const auto &kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw HarnessError("usage", "--set expects key=value, got '" + kv + "'");
      SetConfigValue(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    if (!utt.empty()) cfg.viz_utt = utt;
    if (show_config) {
      std::cout << ResolvedConfig(cfg);
      return 0;
    }
    if (app.get_subcommands().empty()) throw HarnessError("usage", "a subcommand is required; see --help");

    auto &log = std::cerr;
    if (gen->parsed()) CmdGenData(cfg, force, log);
    else if (kmeans->parsed()) CmdFitKmeans(cfg, log);
    else if (train->parsed()) CmdTrain(cfg, log);
    else if (eval->parsed()) CmdDecodeEval(cfg, log);
    else if (viz->parsed()) CmdViz(cfg, log);
    else if (ablate->parsed()) CmdAblateCrop(cfg, log);
    else if (rate->parsed()) CmdRateControl(cfg, log);
    return 0;
  } catch (const HarnessError &e) {
    std::cerr << "error: " << e.tag() << ": " << OneLine(e.what()) << "\n";
    return e.ExitCode();
  } catch (const std::exception &e) {
    std::cerr << "error: internal: " << OneLine(e.what()) << "\n";
    return HarnessError("internal", "").ExitCode();
  }
}
