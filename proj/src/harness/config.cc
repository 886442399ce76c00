// src/harness/config.cc
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

#include "toktx/harness/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace toktx::harness {

namespace {

[[noreturn]] void Bad(std::string_view key, std::string_view value, std::string_view want) {
  throw HarnessError("config", std::string(key) + ": cannot read '" + std::string(value) + "' as " +
                                   std::string(want));
}

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view v) {
  T out{};
  const auto *end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) Bad(key, v, "a number");
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  Bad(key, v, "true/false");
}

template <typename T>
std::vector<T> ParseList(std::string_view key, std::string_view v) {
  std::vector<T> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(ParseNumber<T>(key, Trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) Bad(key, v, "a comma-separated list");
  return out;
}

template <typename T>
std::string Format(T v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string Format(bool v) { return v ? "true" : "false"; }

template <typename T>
std::string FormatList(const std::vector<T> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + Format(v[i]);
  return s;
}

struct Field {
  std::string key;
  std::string doc;
  std::function<void(ExperimentConfig &, std::string_view)> set;
  std::function<std::string(const ExperimentConfig &)> get;
};

// Binds a key to a scalar or list member reached through `ref`.
template <typename Ref>
Field Bind(std::string key, std::string doc, Ref ref) {
  using T = std::remove_reference_t<decltype(ref(std::declval<ExperimentConfig &>()))>;
  Field f{key, std::move(doc), nullptr, nullptr};
  f.set = [key, ref](ExperimentConfig &c, std::string_view v) {
    auto &dst = ref(c);
    if constexpr (std::is_same_v<T, std::string>) {
      dst = std::string(v);
    } else if constexpr (std::is_same_v<T, bool>) {
      dst = ParseBool(key, v);
    } else if constexpr (std::is_arithmetic_v<T>) {
      dst = ParseNumber<T>(key, v);
    } else {
      dst = ParseList<typename T::value_type>(key, v);
    }
  };
  f.get = [ref](const ExperimentConfig &c) {
    auto &src = ref(const_cast<ExperimentConfig &>(c));
    if constexpr (std::is_same_v<T, std::string>) {
      return src;
    } else if constexpr (std::is_arithmetic_v<T>) {
      return Format(src);
    } else {
      return FormatList(src);
    }
  };
  return f;
}

#define TOKTX_FIELD(key, doc, member) Bind(key, doc, [](ExperimentConfig &c) -> auto & { return c.member; })

const std::vector<Field> &Fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f{
        TOKTX_FIELD("experiment.tag", "free-form run label", tag),
        TOKTX_FIELD("experiment.seed", "seed for data, init, batching and sampling", seed),
        TOKTX_FIELD("paths.corpus", "corpus directory", corpus_dir),
        TOKTX_FIELD("paths.codebook", "codebook file", codebook),
        TOKTX_FIELD("paths.checkpoint", "model checkpoint file", checkpoint),
        TOKTX_FIELD("paths.reports", "report directory", reports),
        TOKTX_FIELD("data.n_train", "training utterances", n_train),
        TOKTX_FIELD("data.n_dev", "development utterances", n_dev),
        TOKTX_FIELD("data.n_test", "test utterances", n_test),
        TOKTX_FIELD("data.min_text_len", "shortest text, in symbols", min_text_len),
        TOKTX_FIELD("data.max_text_len", "longest text, in symbols", max_text_len),
        TOKTX_FIELD("data.noise_sigma", "frame noise standard deviation", noise_sigma),
        TOKTX_FIELD("data.grammar_seed", "seed of the unit centroids", grammar_seed),
        TOKTX_FIELD("data.feat_dim", "frame dimension", feat_dim),
        TOKTX_FIELD("data.rate_centers", "centre rate of each regime", rate_centers),
        TOKTX_FIELD("data.rate_half_width", "regime half width", rate_half_width),
        TOKTX_FIELD("data.rate_bins", "rate groups per regime", rate_bins),
        TOKTX_FIELD("data.test_bins", "groups of each regime reserved for test", test_bins),
        TOKTX_FIELD("kmeans.k", "codebook size (also the model vocabulary)", k),
        TOKTX_FIELD("kmeans.iters", "Lloyd iterations per restart", kmeans_iters),
        TOKTX_FIELD("kmeans.restarts", "independent seedings; the lowest inertia wins", kmeans_restarts),
        TOKTX_FIELD("model.d", "hidden width", model.d),
        TOKTX_FIELD("model.d_ref", "reference embedding width", model.d_ref),
        TOKTX_FIELD("model.heads", "attention heads", model.heads),
        TOKTX_FIELD("model.text_layers", "text encoder blocks", model.text_layers),
        TOKTX_FIELD("model.pred_layers", "prediction network layers", model.pred_layers),
        TOKTX_FIELD("model.ff", "attention feed-forward width", model.ff),
        TOKTX_FIELD("model.joint_blocks", "joint residual blocks", model.joint_blocks),
        TOKTX_FIELD("model.joint_ff", "joint feed-forward width", model.joint_ff),
        TOKTX_FIELD("model.lstm_hidden", "LSTM width, 0 = match the attention variant's size",
                    model.lstm_hidden),
        TOKTX_FIELD("model.cond_shift", "reference also shifts the joint layer norms", model.cond_shift),
        TOKTX_FIELD("train.steps", "optimizer steps", steps),
        TOKTX_FIELD("train.batch", "utterances per step", batch),
        TOKTX_FIELD("train.lr", "initial Adam learning rate", lr),
        TOKTX_FIELD("train.lr_final", "learning rate reached by cosine decay at the last step", lr_final),
        TOKTX_FIELD("train.clip", "gradient norm clip", clip),
        TOKTX_FIELD("train.S", "pruned nodes per text position", S),
        TOKTX_FIELD("train.alpha1", "simple-lattice loss weight", alpha1),
        TOKTX_FIELD("train.alpha2", "transducer loss weight", alpha2),
        TOKTX_FIELD("train.alpha2_warmup", "fraction of steps over which alpha2 ramps from 0", alpha2_warmup),
        TOKTX_FIELD("train.crop", "reference crop window W, in frames", crop),
        TOKTX_FIELD("train.log_every", "steps between training log rows", log_every),
        TOKTX_FIELD("train.dev_every", "steps between dev evaluations and checkpoints", dev_every),
        TOKTX_FIELD("train.dev_utts", "dev utterances per evaluation", dev_utts),
        TOKTX_FIELD("decode.k", "top-k candidates", decode.k),
        TOKTX_FIELD("decode.temperature", "sampling temperature", decode.temperature),
        TOKTX_FIELD("decode.max_tokens_per_input", "emission guard per text position",
                    decode.max_tokens_per_input),
        TOKTX_FIELD("decode.seed", "sampling seed", decode.seed),
        TOKTX_FIELD("decode.sample_blank", "sample blank like any other outcome", decode.sample_blank),
        TOKTX_FIELD("eval.own_reference",
                    "reference is the utterance itself (false: another utterance of its rate group)",
                    eval_own_reference),
        TOKTX_FIELD("viz.split", "split holding the utterance", viz_split),
        TOKTX_FIELD("viz.utt", "utterance id", viz_utt),
        TOKTX_FIELD("ablate.seeds", "seeds, one model pair each", ablate_seeds),
        TOKTX_FIELD("ablate.steps", "training steps per ablation model", ablate_steps),
        TOKTX_FIELD("ablate.eval_utts", "test utterances evaluated", ablate_eval_utts),
        TOKTX_FIELD("rate.texts", "test texts decoded", rate_texts),
        TOKTX_FIELD("rate.points", "reference rates per regime", rate_points),
        TOKTX_FIELD("rate.constant_refs", "references per text in the constant-rate control",
                    rate_constant_refs),
        TOKTX_FIELD("rate.k", "top-k for rate decoding, 0 = every outcome", rate_k),
    };
    // Enumerations.
    f.push_back({"model.predictor", "recurrent | attention",
                 [](ExperimentConfig &c, std::string_view v) {
                   try {
                     c.model.predictor = model::ParsePredictor(std::string(v));
                   } catch (const std::exception &) {
                     Bad("model.predictor", v, "recurrent|attention");
                   }
                 },
                 [](const ExperimentConfig &c) { return model::PredictorName(c.model.predictor); }});
    f.push_back({"train.mode", "pruned | exact",
                 [](ExperimentConfig &c, std::string_view v) {
                   if (v == "pruned") c.mode = model::LossMode::kPruned;
                   else if (v == "exact") c.mode = model::LossMode::kExact;
                   else Bad("train.mode", v, "pruned|exact");
                 },
                 [](const ExperimentConfig &c) {
                   return std::string(c.mode == model::LossMode::kPruned ? "pruned" : "exact");
                 }});
    f.push_back({"train.reference", "crop | full",
                 [](ExperimentConfig &c, std::string_view v) {
                   if (v == "crop") c.reference = ReferenceMode::kCrop;
                   else if (v == "full") c.reference = ReferenceMode::kFull;
                   else Bad("train.reference", v, "crop|full");
                 },
                 [](const ExperimentConfig &c) { return ReferenceModeName(c.reference); }});
    f.push_back({"decode.strategy", "greedy | topk",
                 [](ExperimentConfig &c, std::string_view v) {
                   if (v == "greedy") c.decode.strategy = decoder::Strategy::kGreedy;
                   else if (v == "topk") c.decode.strategy = decoder::Strategy::kTopK;
                   else Bad("decode.strategy", v, "greedy|topk");
                 },
                 [](const ExperimentConfig &c) {
                   return std::string(c.decode.strategy == decoder::Strategy::kGreedy ? "greedy" : "topk");
                 }});
    return f;
  }();
  return fields;
}

#undef TOKTX_FIELD

const Field &FindField(std::string_view key) {
  for (const auto &f : Fields())
    if (f.key == key) return f;
  throw HarnessError("config", "unknown key '" + std::string(key) + "'");
}

}  // namespace

int HarnessError::ExitCode() const {
  static const std::pair<const char *, int> codes[] = {
      {"usage", 2}, {"config", 3}, {"exists", 4}, {"missing", 5},
      {"diverged", 6}, {"bad-id", 7}, {"io", 8}, {"internal", 9}};
  for (const auto &[t, code] : codes)
    if (tag_ == t) return code;
  return 1;
}

std::string ReferenceModeName(ReferenceMode m) { return m == ReferenceMode::kCrop ? "crop" : "full"; }

void SetConfigValue(ExperimentConfig &cfg, std::string_view key, std::string_view value) {
  FindField(Trim(key)).set(cfg, Trim(value));
}

ExperimentConfig ParseConfig(std::string_view text, ExperimentConfig base) {
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw HarnessError("config", "line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = Trim(line.substr(0, eq));
    if (!seen.emplace(key).second)
      throw HarnessError("config", "line " + std::to_string(line_no) + ": duplicate key '" +
                                       std::string(key) + "'");
    SetConfigValue(base, key, line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig LoadConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw HarnessError("missing", "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string ResolvedConfig(const ExperimentConfig &cfg) {
  std::string out = "# resolved configuration\n";
  for (const auto &f : Fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

std::string ConfigReference() {
  const ExperimentConfig defaults;
  std::string out;
  for (const auto &f : Fields()) out += f.key + " = " + f.get(defaults) + "  # " + f.doc + "\n";
  return out;
}

void ValidateConfig(const ExperimentConfig &c) {
  auto need = [](bool ok, const std::string &what) {
    if (!ok) throw HarnessError("config", what);
  };
  need(c.n_train > 0 && c.n_dev > 0 && c.n_test > 0, "split sizes must be positive");
  need(c.min_text_len >= 1 && c.max_text_len >= c.min_text_len, "bad text length range");
  need(c.noise_sigma >= 0.0, "data.noise_sigma must be non-negative");
  need(c.feat_dim > 0, "data.feat_dim must be positive");
  need(!c.rate_centers.empty() && c.rate_half_width >= 0.0 && c.rate_bins >= 2,
       "need rate centres, a non-negative half width and at least two bins");
  need(!c.test_bins.empty(), "data.test_bins is empty");
  for (int b : c.test_bins) need(b >= 0 && b < c.rate_bins, "data.test_bins entry out of range");
  need(static_cast<int>(std::set<int>(c.test_bins.begin(), c.test_bins.end()).size()) < c.rate_bins,
       "every rate bin is reserved for test");
  need(c.k >= 2 && c.kmeans_iters >= 1 && c.kmeans_restarts >= 1, "bad k-means settings");
  need(c.steps >= 1 && c.batch >= 1, "train.steps and train.batch must be positive");
  need(c.lr > 0.0 && c.lr_final > 0.0 && c.clip > 0.0, "learning rates and clip must be positive");
  need(c.S >= 2, "train.S must be at least 2");
  need(c.alpha1 >= 0.0 && c.alpha2 > 0.0, "loss weights must be non-negative (alpha2 positive)");
  need(c.alpha2_warmup >= 0.0 && c.alpha2_warmup <= 1.0, "train.alpha2_warmup must lie in [0, 1]");
  need(c.crop >= 1, "train.crop must be positive");
  need(c.log_every >= 1 && c.dev_every >= 1 && c.dev_utts >= 1, "bad logging intervals");
  need(!c.ablate_seeds.empty() && c.ablate_steps >= 1 && c.ablate_eval_utts >= 1, "bad ablation settings");
  need(c.rate_texts >= 1 && c.rate_points >= 2 && c.rate_constant_refs >= 2 && c.rate_k >= 0,
       "bad rate-control settings");
  try {
    c.decode.Validate();
  } catch (const std::invalid_argument &e) {
    throw HarnessError("config", e.what());
  }
}

}  // namespace toktx::harness
