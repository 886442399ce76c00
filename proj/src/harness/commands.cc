// src/harness/commands.cc
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

#include "toktx/harness/commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "toktx/decoder/decoder.h"
#include "toktx/harness/corpus_io.h"
#include "toktx/lattice/dump.h"
#include "toktx/lattice/lattice.h"
#include "toktx/quantizer/synthetic_corpus.h"

namespace toktx::harness {

namespace fs = std::filesystem;

namespace {

std::string Fmt(const char *fmt, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string Dir(const std::string &file) {
  const auto parent = fs::path(file).parent_path();
  return parent.empty() ? "." : parent.string();
}

void Snapshot(const ExperimentConfig &cfg, const std::string &dir, const std::string &command) {
  WriteText(dir + "/" + command + ".config", ResolvedConfig(cfg));
}

quantizer::Codebook ReadCodebook(const ExperimentConfig &cfg) {
  if (!fs::exists(cfg.codebook))
    throw HarnessError("missing", "no codebook at " + cfg.codebook + " (run fit-kmeans first)");
  try {
    return quantizer::LoadCodebook(cfg.codebook);
  } catch (const std::exception &e) {
    throw HarnessError("io", e.what());
  }
}

std::unique_ptr<model::TokenTransducer> ReadModel(const ExperimentConfig &cfg) {
  if (!fs::exists(cfg.checkpoint))
    throw HarnessError("missing", "no checkpoint at " + cfg.checkpoint + " (run train first)");
  try {
    return model::TokenTransducer::Load(cfg.checkpoint);
  } catch (const std::exception &e) {
    throw HarnessError("io", e.what());
  }
}

quantizer::Grammar CorpusGrammar(const ExperimentConfig &cfg) {
  const auto meta = ReadCorpusMeta(cfg.corpus_dir);
  return quantizer::Grammar(meta.feat_dim, meta.grammar_seed);
}

std::vector<CorpusRecord> Head(std::vector<CorpusRecord> records, int n) {
  if (static_cast<int>(records.size()) > n) records.resize(n);
  return records;
}

std::string JoinInts(std::span<const int> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

// Nodes of each row, highest occupancy first, until 0.99 of the row's mass.
std::vector<uint8_t> MassRegion(const lattice::Occupancy &occ, double mass) {
  std::vector<uint8_t> region(occ.node.size(), 0);
  const int cols = occ.T + 1;
  for (int u = 0; u < occ.U; ++u) {
    std::vector<int> order(cols);
    std::iota(order.begin(), order.end(), 0);
    auto row = [&](int t) { return occ.Node(u, t); };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return row(a) > row(b); });
    double total = 0.0;
    for (int t = 0; t < cols; ++t) total += row(t);
    double acc = 0.0;
    for (int t : order) {
      if (acc >= mass * total) break;
      region[static_cast<std::size_t>(u) * cols + t] = 1;
      acc += row(t);
    }
  }
  return region;
}

void ExportMatrix(const std::string &stem, std::span<const double> values, int rows, int cols,
                  std::vector<std::string> &files) {
  lattice::WriteFile(stem + ".csv", lattice::MatrixCsv(values, rows, cols));
  lattice::WriteFile(stem + ".pgm", lattice::MatrixPgm(values, rows, cols));
  files.push_back(stem + ".csv");
  files.push_back(stem + ".pgm");
}

}  // namespace

double Pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: need two equal-length series");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

void CmdGenData(const ExperimentConfig &cfg, bool force, std::ostream &log) {
  ValidateConfig(cfg);
  const std::string &dir = cfg.corpus_dir;
  if (fs::exists(dir)) {
    if (!force) throw HarnessError("exists", dir + " already exists (use --force to replace the corpus)");
    for (const char *name : {"meta", "train.tsv", "dev.tsv", "test.tsv", "summary.csv", "gen-data.config"})
      fs::remove(fs::path(dir) / name);
    fs::remove_all(fs::path(dir) / "frames");
  }
  const quantizer::Grammar grammar(cfg.feat_dim, cfg.grammar_seed);
  const RateSplit rates = SplitRates(cfg);
  for (int g : rates.test_groups)
    if (std::find(rates.train_groups.begin(), rates.train_groups.end(), g) != rates.train_groups.end())
      throw HarnessError("internal", "test rate group also used for training");

  WriteCorpusMeta(dir, {cfg.feat_dim, cfg.grammar_seed, cfg.rate_bins});
  std::string summary = "split,utterances,frames,min_rate,max_rate,groups\n";
  const struct {
    const char *name;
    int n;
    const std::vector<quantizer::RateInterval> *rates;
  } splits[] = {{"train", cfg.n_train, &rates.train}, {"dev", cfg.n_dev, &rates.train},
                {"test", cfg.n_test, &rates.test}};
  for (std::size_t s = 0; s < std::size(splits); ++s) {
    quantizer::CorpusOptions opts;
    opts.n_utts = splits[s].n;
    opts.min_text_len = cfg.min_text_len;
    opts.max_text_len = cfg.max_text_len;
    opts.rates = *splits[s].rates;
    opts.noise_sigma = cfg.noise_sigma;
    opts.seed = cfg.seed * 1000 + s + 1;
    auto utts = quantizer::GenerateCorpus(opts, grammar);
    std::vector<CorpusRecord> records;
    std::size_t frames = 0;
    double lo = utts[0].rate, hi = utts[0].rate;
    std::vector<int> groups;
    for (std::size_t i = 0; i < utts.size(); ++i) {
      CorpusRecord r;
      char id[32];
      std::snprintf(id, sizeof id, "%s-%04zu", splits[s].name, i);
      r.id = id;
      r.rate = utts[i].rate;
      r.group = RateGroup(cfg, r.rate);
      r.text = std::move(utts[i].text);
      r.gold = std::move(utts[i].gold_tokens);
      r.frames = std::move(utts[i].frames);
      r.frames_file = "frames/" + r.id + ".f64";
      frames += r.frames.rows;
      lo = std::min(lo, r.rate);
      hi = std::max(hi, r.rate);
      if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
      records.push_back(std::move(r));
    }
    WriteSplit(dir, splits[s].name, records);
    std::sort(groups.begin(), groups.end());
    summary += std::string(splits[s].name) + "," + std::to_string(records.size()) + "," +
               std::to_string(frames) + "," + Fmt("%.4f", lo) + "," + Fmt("%.4f", hi) + "," +
               JoinInts(groups) + "\n";
    log << splits[s].name << ": " << records.size() << " utterances, " << frames << " frames\n";
  }
  WriteText(dir + "/summary.csv", summary);
  Snapshot(cfg, dir, "gen-data");
}

quantizer::Codebook CmdFitKmeans(const ExperimentConfig &cfg, std::ostream &log) {
  ValidateConfig(cfg);
  const auto train = ReadSplit(cfg.corpus_dir, "train");
  const auto frames = StackFrames(train);
  std::vector<int> gold;
  for (const auto &r : train) gold.insert(gold.end(), r.gold.begin(), r.gold.end());
  auto cb = quantizer::KMeansFit(frames, cfg.k, cfg.kmeans_iters, cfg.seed, cfg.kmeans_restarts);
  cb.label_map = quantizer::MajorityLabels(frames, gold, cb, quantizer::kNumUnits);
  const auto assign = quantizer::Tokenize(frames, cb);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < assign.size(); ++i) agree += cb.label_map[assign[i]] == gold[i];
  const double purity = static_cast<double>(agree) / assign.size();
  EnsureParentDir(cfg.codebook);
  quantizer::SaveCodebook(cfg.codebook, cb);
  WriteText(cfg.reports + "/kmeans.csv", "k,frames,inertia,purity\n" + std::to_string(cfg.k) + "," +
                                             std::to_string(frames.rows) + "," +
                                             Fmt("%.6f", cb.inertia.back()) + "," + Fmt("%.6f", purity) + "\n");
  Snapshot(cfg, Dir(cfg.codebook), "fit-kmeans");
  log << "k-means: k=" << cfg.k << " inertia " << Fmt("%.3f", cb.inertia.back()) << " purity "
      << Fmt("%.4f", purity) << "\n";
  return cb;
}

TrainSummary CmdTrain(const ExperimentConfig &cfg, std::ostream &log) {
  ValidateConfig(cfg);
  const auto train = ReadSplit(cfg.corpus_dir, "train");
  const auto dev = ReadSplit(cfg.corpus_dir, "dev");
  const auto cb = ReadCodebook(cfg);
  if (cb.k() != cfg.k || static_cast<int>(cb.dim()) != cfg.feat_dim)
    throw HarnessError("config", "codebook does not match kmeans.k / data.feat_dim");
  model::TokenTransducer m(BuildModelConfig(cfg, cfg.seed));
  log << "training " << model::PredictorName(cfg.model.predictor) << " predictor, "
      << m.params().NumScalars() << " parameters, " << cfg.steps << " steps\n";
  Snapshot(cfg, Dir(cfg.checkpoint), "train");
  TrainRun run;
  run.steps = cfg.steps;
  run.reference = cfg.reference;
  run.seed = cfg.seed;
  run.checkpoint = cfg.checkpoint;
  run.log_csv = cfg.reports + "/train_log.csv";
  run.dev_csv = cfg.reports + "/dev_log.csv";
  return TrainModel(cfg, m, train, dev, cb, run, &log);
}

EvalSummary CmdDecodeEval(const ExperimentConfig &cfg, std::ostream &log) {
  ValidateConfig(cfg);
  const auto m = ReadModel(cfg);
  const auto cb = ReadCodebook(cfg);
  const auto test = ReadSplit(cfg.corpus_dir, "test");
  std::vector<std::size_t> source(test.size());
  std::iota(source.begin(), source.end(), 0);
  if (!cfg.eval_own_reference) source = GroupPartners(test);

  std::vector<decoder::DecodeInput> inputs;
  for (std::size_t i = 0; i < test.size(); ++i) inputs.push_back({test[i].text, test[source[i]].frames});
  const auto batch = decoder::BatchDecodeTimed(*m, inputs, cfg.decode);

  EvalSummary s;
  std::string rows = "id,group,reference,U,gold_len,hyp_len,token_ins,token_del,token_sub,symbol_ins,"
                     "symbol_del,symbol_sub,truncated\n";
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto &r = test[i];
    const auto &res = batch.results[i];
    const auto tok = TokenEdits(res.tokens, r, cb);
    std::vector<int> units(res.tokens);
    if (!cb.label_map.empty())
      for (int &u : units) u = cb.label_map.at(u);
    const auto symbols = quantizer::Grammar::Invert(units);
    const auto sym = metrics::LevenshteinOps(std::span<const int>(r.text), std::span<const int>(symbols));
    s.token += tok;
    s.symbol += sym;
    s.truncated += res.truncated;
    rows += r.id + "," + std::to_string(r.group) + "," + test[source[i]].id + "," + std::to_string(r.text.size()) +
            "," + std::to_string(r.gold.size()) + "," + std::to_string(res.tokens.size()) + "," +
            std::to_string(tok.ins) + "," + std::to_string(tok.del) + "," + std::to_string(tok.sub) + "," +
            std::to_string(sym.ins) + "," + std::to_string(sym.del) + "," + std::to_string(sym.sub) + "," +
            std::to_string(res.truncated) + "\n";
  }
  s.utterances = static_cast<int>(test.size());
  std::string summary = "metric,value\n";
  auto add = [&summary](const std::string &k, double v) { summary += k + "," + Fmt("%.6f", v) + "\n"; };
  add("utterances", s.utterances);
  add("token_cer", s.token.Rate());
  add("token_ins_rate", s.token.InsRate());
  add("token_del_rate", s.token.DelRate());
  add("token_sub_rate", s.token.SubRate());
  add("symbol_wer", s.symbol.Rate());
  add("symbol_ins_rate", s.symbol.InsRate());
  add("symbol_del_rate", s.symbol.DelRate());
  add("symbol_sub_rate", s.symbol.SubRate());
  add("truncated_fraction", static_cast<double>(s.truncated) / s.utterances);
  WriteText(cfg.reports + "/eval_utts.csv", rows);
  WriteText(cfg.reports + "/eval_summary.csv", summary);
  WriteText(cfg.reports + "/timing.csv", decoder::TimingCsv(batch.timing));
  Snapshot(cfg, cfg.reports, "decode-eval");
  log << "test: token CER " << Fmt("%.4f", s.token.Rate()) << " (ins " << Fmt("%.4f", s.token.InsRate())
      << ", del " << Fmt("%.4f", s.token.DelRate()) << "), symbol WER " << Fmt("%.4f", s.symbol.Rate()) << "\n";
  return s;
}

VizSummary CmdViz(const ExperimentConfig &cfg, std::ostream &log) {
  ValidateConfig(cfg);
  const auto m = ReadModel(cfg);
  const auto records = ReadSplit(cfg.corpus_dir, cfg.viz_split);
  const auto it = std::find_if(records.begin(), records.end(),
                               [&](const CorpusRecord &r) { return r.id == cfg.viz_utt; });
  if (it == records.end())
    throw HarnessError("bad-id", "no utterance '" + cfg.viz_utt + "' in split " + cfg.viz_split);

  const auto dec = decoder::Decode(*m, it->text, it->frames, cfg.decode);
  const auto &y = dec.tokens;
  const auto j = m->Lattice(it->text, y, it->frames);
  const auto fwd = lattice::ForwardLoss(j, y);
  const auto occ = lattice::PosteriorOccupancy(j, y);

  VizSummary s;
  s.U = j.U;
  s.T = j.T;
  s.log_z = fwd.log_z;
  s.start_occupancy = occ.Node(0, 0);
  s.end_occupancy = occ.Node(j.U - 1, j.T);
  s.mask_valid = lattice::IsValidPath(dec.alignment, y);
  const auto region = MassRegion(occ, 0.99);
  std::size_t on = 0, inside = 0;
  for (std::size_t k = 0; k < region.size(); ++k) {
    on += dec.alignment.mask[k];
    inside += dec.alignment.mask[k] && region[k];
  }
  s.coverage = static_cast<double>(inside) / on;

  const std::string dir = cfg.reports + "/viz";
  fs::create_directories(dir);
  const std::string stem = dir + "/" + it->id;
  const std::vector<double> mask(dec.alignment.mask.begin(), dec.alignment.mask.end());
  ExportMatrix(stem + "_log_alpha", fwd.alpha, j.U, j.T + 1, s.files);
  ExportMatrix(stem + "_occupancy", occ.node, j.U, j.T + 1, s.files);
  ExportMatrix(stem + "_alignment", mask, j.U, j.T + 1, s.files);
  std::string summary = "key,value\nU," + std::to_string(s.U) + "\nT," + std::to_string(s.T) +
                        "\nlog_z," + Fmt("%.9g", s.log_z) + "\nstart_occupancy," +
                        Fmt("%.12f", s.start_occupancy) + "\nend_occupancy," + Fmt("%.12f", s.end_occupancy) +
                        "\nmask_valid," + (s.mask_valid ? "1" : "0") + "\ncoverage_0.99," +
                        Fmt("%.6f", s.coverage) + "\n";
  WriteText(stem + "_summary.csv", summary);
  s.files.push_back(stem + "_summary.csv");
  Snapshot(cfg, dir, "viz");
  log << it->id << ": U=" << s.U << " T=" << s.T << " coverage " << Fmt("%.3f", s.coverage) << "\n";
  return s;
}

AblationSummary CmdAblateCrop(const ExperimentConfig &cfg, std::ostream &log) {
  ValidateConfig(cfg);
  const auto train = ReadSplit(cfg.corpus_dir, "train");
  const auto test = Head(ReadSplit(cfg.corpus_dir, "test"), cfg.ablate_eval_utts);
  const auto cb = ReadCodebook(cfg);
  const auto partner = GroupPartners(test);
  const auto targets = TokenTargets(test, cb);
  std::vector<const quantizer::FrameMatrix *> own, other;
  for (std::size_t i = 0; i < test.size(); ++i) {
    own.push_back(&test[i].frames);
    other.push_back(&test[partner[i]].frames);
  }
  decoder::DecodeConfig greedy = cfg.decode;
  greedy.strategy = decoder::Strategy::kGreedy;

  AblationSummary s;
  std::string runs = "seed,reference,nll_per_token_matched,nll_per_token_mismatched,nll_gap,"
                     "token_cer_matched,token_cer_mismatched\n";
  auto row_csv = [](const std::string &head, const AblationRow &r) {
    return head + "," + ReferenceModeName(r.reference) + "," + Fmt("%.6f", r.nll_matched) + "," +
           Fmt("%.6f", r.nll_mismatched) + "," + Fmt("%.6f", r.Gap()) + "," + Fmt("%.6f", r.cer_matched) +
           "," + Fmt("%.6f", r.cer_mismatched) + "\n";
  };
  for (const auto seed : cfg.ablate_seeds) {
    for (const auto mode : {ReferenceMode::kFull, ReferenceMode::kCrop}) {
      model::TokenTransducer m(BuildModelConfig(cfg, seed));
      TrainRun run;
      run.steps = cfg.ablate_steps;
      run.reference = mode;
      run.seed = seed;
      TrainModel(cfg, m, train, {}, cb, run, nullptr);

      AblationRow row;
      row.seed = seed;
      row.reference = mode;
      row.nll_matched = NllPerToken(m, test, targets, own);
      row.nll_mismatched = NllPerToken(m, test, targets, other);
      metrics::EditOps em, ex;
      for (std::size_t i = 0; i < test.size(); ++i) {
        em += TokenEdits(decoder::Decode(m, test[i].text, *own[i], greedy).tokens, test[i], cb);
        ex += TokenEdits(decoder::Decode(m, test[i].text, *other[i], greedy).tokens, test[i], cb);
      }
      row.cer_matched = em.Rate();
      row.cer_mismatched = ex.Rate();
      s.runs.push_back(row);
      runs += row_csv(std::to_string(seed), row);
      log << "seed " << seed << " " << ReferenceModeName(mode) << ": nll/token " << Fmt("%.4f", row.nll_matched)
          << " -> " << Fmt("%.4f", row.nll_mismatched) << ", token CER " << Fmt("%.4f", row.cer_matched)
          << " -> " << Fmt("%.4f", row.cer_mismatched) << std::endl;
    }
  }
  for (auto *mean : {&s.full, &s.crop}) {
    mean->reference = mean == &s.full ? ReferenceMode::kFull : ReferenceMode::kCrop;
    int n = 0;
    for (const auto &r : s.runs) {
      if (r.reference != mean->reference) continue;
      mean->nll_matched += r.nll_matched;
      mean->nll_mismatched += r.nll_mismatched;
      mean->cer_matched += r.cer_matched;
      mean->cer_mismatched += r.cer_mismatched;
      ++n;
    }
    mean->nll_matched /= n;
    mean->nll_mismatched /= n;
    mean->cer_matched /= n;
    mean->cer_mismatched /= n;
  }
  WriteText(cfg.reports + "/ablate_crop_runs.csv", runs);
  WriteText(cfg.reports + "/ablate_crop.csv",
            "reference,nll_per_token_matched,nll_per_token_mismatched,nll_gap,token_cer_matched,"
            "token_cer_mismatched\n" +
                row_csv("", s.full).substr(1) + row_csv("", s.crop).substr(1));
  Snapshot(cfg, cfg.reports, "ablate-crop");
  return s;
}

RateSummary CmdRateControl(const ExperimentConfig &cfg, std::ostream &log) {
  ValidateConfig(cfg);
  const auto trained = ReadModel(cfg);
  const auto grammar = CorpusGrammar(cfg);
  const auto texts = Head(ReadSplit(cfg.corpus_dir, "test"), cfg.rate_texts);
  model::TokenTransducer untrained(trained->config());

  auto reference = [&](double rate, std::uint64_t seed) {
    quantizer::CorpusOptions o;
    o.n_utts = 1;
    o.min_text_len = cfg.min_text_len;
    o.max_text_len = cfg.max_text_len;
    o.rates = {{rate, rate}};
    o.noise_sigma = cfg.noise_sigma;
    o.seed = seed;
    return quantizer::GenerateCorpus(o, grammar)[0].frames;
  };
  std::vector<double> rates;
  std::vector<quantizer::FrameMatrix> refs;
  for (double c : cfg.rate_centers)
    for (int p = 0; p < cfg.rate_points; ++p) {
      rates.push_back(c - cfg.rate_half_width + 2.0 * cfg.rate_half_width * p / (cfg.rate_points - 1));
      refs.push_back(reference(rates.back(), cfg.seed * 7919 + refs.size()));
    }

  decoder::DecodeConfig dc = cfg.decode;
  dc.strategy = decoder::Strategy::kTopK;
  dc.k = cfg.rate_k > 0 ? cfg.rate_k : trained->config().vocab + 1;
  dc.sample_blank = true;
  auto count = [&](const model::TokenTransducer &m, const CorpusRecord &text, const quantizer::FrameMatrix &ref,
                   std::uint64_t seed) {
    decoder::DecodeConfig c = dc;
    c.seed = seed;
    return static_cast<double>(decoder::Decode(m, text.text, ref, c).tokens.size());
  };

  RateSummary s;
  std::string rows = "model,text,ref_rate,tokens\n";
  for (const auto *m : {trained.get(), &untrained}) {
    const std::string name = m == trained.get() ? "trained" : "untrained";
    std::vector<double> x, y, xc, yc;
    for (std::size_t t = 0; t < texts.size(); ++t) {
      const std::size_t first = y.size();
      for (std::size_t r = 0; r < refs.size(); ++r) {
        x.push_back(rates[r]);
        y.push_back(count(*m, texts[t], refs[r], cfg.decode.seed + t * refs.size() + r));
        rows += name + "," + texts[t].id + "," + Fmt("%.4f", rates[r]) + "," + Fmt("%.0f", y.back()) + "\n";
      }
      // Text length is a nuisance here; centre both sides per text.
      const double mx = std::accumulate(x.begin() + first, x.end(), 0.0) / refs.size();
      const double my = std::accumulate(y.begin() + first, y.end(), 0.0) / refs.size();
      for (std::size_t i = first; i < y.size(); ++i) {
        xc.push_back(x[i] - mx);
        yc.push_back(y[i] - my);
      }
    }
    const bool is_trained = m == trained.get();
    (is_trained ? s.pearson_trained : s.pearson_untrained) = Pearson(xc, yc);
    (is_trained ? s.pooled_trained : s.pooled_untrained) = Pearson(x, y);
  }

  // Constant-rate control: one rate, different reference utterances.
  double cv_sum = 0.0;
  for (std::size_t t = 0; t < texts.size(); ++t) {
    std::vector<double> lens;
    for (int r = 0; r < cfg.rate_constant_refs; ++r)
      lens.push_back(count(*trained, texts[t], reference(cfg.rate_centers[0], cfg.seed * 104729 + r),
                           cfg.decode.seed + 7 * t + r));
    const double mean = std::accumulate(lens.begin(), lens.end(), 0.0) / lens.size();
    double var = 0.0;
    for (double l : lens) var += (l - mean) * (l - mean);
    cv_sum += std::sqrt(var / lens.size()) / mean;
  }
  s.constant_rate_cv = cv_sum / texts.size();

  WriteText(cfg.reports + "/rate_control.csv", rows);
  WriteText(cfg.reports + "/rate_control_summary.csv",
            "metric,value\npearson_trained," + Fmt("%.6f", s.pearson_trained) + "\npearson_untrained," +
                Fmt("%.6f", s.pearson_untrained) + "\npooled_pearson_trained," + Fmt("%.6f", s.pooled_trained) +
                "\npooled_pearson_untrained," + Fmt("%.6f", s.pooled_untrained) + "\nconstant_rate_cv," +
                Fmt("%.6f", s.constant_rate_cv) + "\n");
  Snapshot(cfg, cfg.reports, "rate-control");
  log << "rate control: r trained " << Fmt("%.4f", s.pearson_trained) << ", untrained "
      << Fmt("%.4f", s.pearson_untrained) << ", constant-rate CV " << Fmt("%.4f", s.constant_rate_cv) << "\n";
  return s;
}

}  // namespace toktx::harness
