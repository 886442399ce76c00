// tests/harness_test.cc
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "toktx/grad/checkpoint.h"
#include "toktx/harness/commands.h"
#include "toktx/harness/config.h"
#include "toktx/harness/corpus_io.h"
#include "toktx/harness/training.h"

using namespace toktx;
using namespace toktx::harness;
namespace fs = std::filesystem;

namespace {

std::ostringstream sink;

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh directory per test case.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &name)
      : path(fs::temp_directory_path() / ("toktx_harness_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig SmallConfig(const fs::path &root) {
  ExperimentConfig c;
  c.corpus_dir = (root / "corpus").string();
  c.codebook = (root / "codebook.bin").string();
  c.checkpoint = (root / "model.ckpt").string();
  c.reports = (root / "reports").string();
  c.n_train = 120;
  c.n_dev = 12;
  c.n_test = 24;
  c.steps = 30;
  c.log_every = 5;
  c.dev_every = 15;
  c.dev_utts = 12;
  return c;
}

std::string Tag(const std::function<void()> &f) {
  try {
    f();
  } catch (const HarnessError &e) {
    return e.tag();
  }
  return "";
}

}  // namespace

TEST_CASE("config parse, overrides and errors") {
  auto c = ParseConfig("# comment\n  train.steps = 50  \nmodel.predictor=attention # trailing\n"
                       "data.rate_centers = 1.0, 1.5,2.5\ndecode.strategy = topk\n");
  CHECK(c.steps == 50);
  CHECK(c.model.predictor == model::PredictorKind::kCausalAttention);
  CHECK(c.rate_centers == std::vector<double>{1.0, 1.5, 2.5});
  CHECK(c.decode.strategy == decoder::Strategy::kTopK);
  CHECK(c.batch == 16);  // untouched keys keep their defaults

  CHECK(Tag([] { ParseConfig("train.stepz = 1\n"); }) == "config");
  CHECK(Tag([] { ParseConfig("train.steps = many\n"); }) == "config");
  CHECK(Tag([] { ParseConfig("train.steps = 5\ntrain.steps = 6\n"); }) == "config");
  CHECK(Tag([] { ParseConfig("train.steps\n"); }) == "config");
  CHECK(Tag([] { ParseConfig("train.mode = approximate\n"); }) == "config");

  ExperimentConfig bad;
  bad.S = 1;
  CHECK(Tag([&] { ValidateConfig(bad); }) == "config");
  bad = {};
  bad.test_bins = {0, 1, 2, 3, 4, 5};
  CHECK(Tag([&] { ValidateConfig(bad); }) == "config");
  ValidateConfig(ExperimentConfig{});
}

TEST_CASE("resolved config round-trips") {
  ExperimentConfig c;
  c.seed = 99;
  c.lr = 3e-4;
  c.tag = "probe";
  c.ablate_seeds = {4, 5};
  c.reference = ReferenceMode::kFull;
  c.mode = model::LossMode::kExact;
  c.decode.sample_blank = false;
  const auto text = ResolvedConfig(c);
  CHECK(ResolvedConfig(ParseConfig(text)) == text);
  CHECK(ResolvedConfig(ParseConfig(ResolvedConfig({}))) == ResolvedConfig({}));
  // Every documented key appears in the reference with its default.
  std::istringstream ref(ConfigReference());
  std::string line;
  int keys = 0;
  while (std::getline(ref, line)) {
    CHECK(line.find(" # ") != std::string::npos);
    ++keys;
  }
  CHECK(keys == std::count(text.begin(), text.end(), '\n') - 1);
}

TEST_CASE("default splits are 2000/200/200") {
  const ExperimentConfig c;
  CHECK(c.n_train == 2000);
  CHECK(c.n_dev == 200);
  CHECK(c.n_test == 200);
  const auto rates = SplitRates(c);
  CHECK(rates.train.size() == 8);
  CHECK(rates.test.size() == 4);
  for (int g : rates.test_groups)
    CHECK(std::find(rates.train_groups.begin(), rates.train_groups.end(), g) == rates.train_groups.end());
  CHECK(RateGroup(c, 0.85) == 0);
  CHECK(RateGroup(c, 1.15) == 5);
  CHECK(RateGroup(c, 2.06) == 10);
  CHECK(RateGroup(c, 1.5) == -1);
}

TEST_CASE("gen-data writes disjoint, reproducible splits") {
  TempDir tmp("gen");
  auto c = SmallConfig(tmp.path);
  CmdGenData(c, false, sink);
  const auto train = ReadSplit(c.corpus_dir, "train");
  const auto dev = ReadSplit(c.corpus_dir, "dev");
  const auto test = ReadSplit(c.corpus_dir, "test");
  CHECK(train.size() == 120);
  CHECK(dev.size() == 12);
  CHECK(test.size() == 24);
  std::set<int> train_groups, test_groups;
  for (const auto &r : train) train_groups.insert(r.group);
  for (const auto &r : dev) train_groups.insert(r.group);
  for (const auto &r : test) test_groups.insert(r.group);
  for (int g : test_groups) CHECK(train_groups.count(g) == 0);
  for (const auto &r : test) {
    CHECK(RateGroup(c, r.rate) == r.group);
    CHECK(r.gold == quantizer::Grammar::Expand(r.text, r.rate));
    CHECK(r.frames.rows == r.gold.size());
  }

  CHECK(Tag([&] { CmdGenData(c, false, sink); }) == "exists");
  const auto before = Slurp(fs::path(c.corpus_dir) / "test.tsv");
  const auto frames_before = Slurp(fs::path(c.corpus_dir) / test[3].frames_file);
  CmdGenData(c, true, sink);
  CHECK(Slurp(fs::path(c.corpus_dir) / "test.tsv") == before);
  CHECK(Slurp(fs::path(c.corpus_dir) / test[3].frames_file) == frames_before);
  CHECK(fs::exists(fs::path(c.corpus_dir) / "gen-data.config"));

  c.seed = 2;
  CmdGenData(c, true, sink);
  CHECK(Slurp(fs::path(c.corpus_dir) / "test.tsv") != before);
}

TEST_CASE("corpus records round-trip") {
  TempDir tmp("io");
  CorpusRecord r;
  r.id = "x-0";
  r.group = 3;
  r.rate = 1.0 / 3.0;
  r.text = {1, 2};
  r.gold = {1, 17, 2};
  r.frames = quantizer::FrameMatrix(3, 2);
  r.frames.data = {0.1, -2.5, 1e-300, 7.0, std::nextafter(1.0, 2.0), -0.0};
  r.frames_file = "frames/x-0.f64";
  const std::string dir = tmp.path.string();
  WriteCorpusMeta(dir, {2, 7, 6});
  WriteSplit(dir, "s", {r});
  const auto back = ReadSplit(dir, "s");
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == r.id);
  CHECK(back[0].group == 3);
  CHECK(back[0].rate == r.rate);
  CHECK(back[0].text == r.text);
  CHECK(back[0].gold == r.gold);
  CHECK(back[0].frames.data == r.frames.data);
  CHECK(Tag([&] { ReadSplit(dir, "absent"); }) == "missing");
  fs::resize_file(tmp.path / r.frames_file, 8);
  CHECK(Tag([&] { ReadSplit(dir, "s"); }) == "io");
}

TEST_CASE("fit-kmeans recovers the units") {
  TempDir tmp("kmeans");
  auto c = SmallConfig(tmp.path);
  CmdGenData(c, false, sink);
  const auto cb = CmdFitKmeans(c, sink);
  CHECK(cb.k() == 32);
  std::set<int> labels(cb.label_map.begin(), cb.label_map.end());
  CHECK(labels.size() == 32);
  const auto back = quantizer::LoadCodebook(c.codebook);
  CHECK(back.label_map == cb.label_map);
  CHECK(Slurp(fs::path(c.reports) / "kmeans.csv").find(",1.000000\n") != std::string::npos);
}

TEST_CASE("micro training run, reproducibility and missing inputs") {
  TempDir tmp("train");
  auto c = SmallConfig(tmp.path);
  CHECK(Tag([&] { CmdTrain(c, sink); }) == "missing");
  CmdGenData(c, false, sink);
  CHECK(Tag([&] { CmdTrain(c, sink); }) == "missing");  // no codebook yet
  CmdFitKmeans(c, sink);
  CHECK(Tag([&] { CmdDecodeEval(c, sink); }) == "missing");

  c.steps = 200;
  c.dev_every = 100;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = CmdTrain(c, sink);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("200-step micro run: " << secs << " s");
  CHECK(secs < 60.0);
  CHECK(s.steps == 200);
  CHECK(std::isfinite(s.last_loss));
  // Pruned mode evaluates at most U * S joint nodes per utterance.
  CHECK(s.max_joint_nodes <= static_cast<std::uint64_t>(c.max_text_len * c.S));

  const auto log = Slurp(fs::path(c.reports) / "train_log.csv");
  const auto ckpt = grad::LoadTensors(c.checkpoint);
  // Re-running from the snapshot reproduces the run.
  auto again = LoadConfig((fs::path(c.checkpoint).parent_path() / "train.config").string());
  CmdTrain(again, sink);
  CHECK(Slurp(fs::path(c.reports) / "train_log.csv") == log);
  const auto ckpt2 = grad::LoadTensors(c.checkpoint);
  REQUIRE(ckpt.size() == ckpt2.size());
  bool same = true;
  for (std::size_t i = 0; i < ckpt.size(); ++i)
    same = same && ckpt[i].first == ckpt2[i].first &&
           std::equal(ckpt[i].second.data().begin(), ckpt[i].second.data().end(),
                      ckpt2[i].second.data().begin());
  CHECK(same);

  const auto e1 = CmdDecodeEval(c, sink);
  const auto eval_bytes = Slurp(fs::path(c.reports) / "eval_utts.csv");
  CmdDecodeEval(c, sink);
  CHECK(Slurp(fs::path(c.reports) / "eval_utts.csv") == eval_bytes);
  CHECK(e1.utterances == 24);
  CHECK(e1.token.ref_len > 0);

  c.viz_utt = "test-9999";
  CHECK(Tag([&] { CmdViz(c, sink); }) == "bad-id");
  c.viz_utt = "test-0002";
  const auto v = CmdViz(c, sink);
  CHECK(v.mask_valid);
  CHECK(std::abs(v.start_occupancy - 1.0) < 1e-9);
  CHECK(std::abs(v.end_occupancy - 1.0) < 1e-9);
  CHECK(v.files.size() == 7);
}

TEST_CASE("divergence saves the last good model") {
  TempDir tmp("nan");
  auto c = SmallConfig(tmp.path);
  CmdGenData(c, false, sink);
  const auto cb = CmdFitKmeans(c, sink);
  auto train = ReadSplit(c.corpus_dir, "train");
  for (auto &r : train) r.frames.data[0] = std::nan("");
  model::TokenTransducer m(BuildModelConfig(c, 1));
  const auto before = m.params().items()[0].second.data()[0];
  TrainRun run;
  run.steps = 5;
  run.checkpoint = c.checkpoint;
  CHECK(Tag([&] { TrainModel(c, m, train, {}, cb, run, nullptr); }) == "diverged");
  REQUIRE(fs::exists(c.checkpoint));
  const auto saved = grad::LoadTensors(c.checkpoint);
  CHECK(grad::FindTensor(saved, m.params().items()[0].first).data()[0] == before);
}

TEST_CASE("group partners and pearson") {
  std::vector<CorpusRecord> recs(5);
  const int groups[] = {1, 2, 1, 2, 1};
  for (int i = 0; i < 5; ++i) recs[i].group = groups[i];
  const auto p = GroupPartners(recs);
  CHECK(p == std::vector<std::size_t>{2, 3, 4, 1, 0});
  recs.push_back(recs[0]);
  recs.back().group = 9;
  CHECK(Tag([&] { GroupPartners(recs); }) == "config");

  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1}, flat{5, 5, 5, 5};
  CHECK(Pearson(x, y) == doctest::Approx(1.0));
  CHECK(Pearson(x, z) == doctest::Approx(-1.0));
  CHECK(std::isnan(Pearson(x, flat)));
  const std::vector<double> a{1, 2, 3}, b{1, 3, 2};
  CHECK(Pearson(a, b) == doctest::Approx(0.5));
}

TEST_CASE("command line exit codes") {
  TempDir tmp("cli");
  const std::string cli = TOKTX_CLI;
  const std::string err = (tmp.path / "err.txt").string();
  auto run = [&](const std::string &args) {
    const int status = std::system((cli + " " + args + " 2>" + err).c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run("--show-config > /dev/null") == 0);
  CHECK(run("") == 2);
  CHECK(run("train --set train.bogus=1") == 3);
  const auto msg = Slurp(err);
  CHECK(msg.rfind("error: config: ", 0) == 0);
  CHECK(std::count(msg.begin(), msg.end(), '\n') == 1);
  CHECK(run("decode-eval --set paths.checkpoint=" + (tmp.path / "none.ckpt").string()) == 5);
  CHECK(Slurp(err).rfind("error: missing: ", 0) == 0);
}
