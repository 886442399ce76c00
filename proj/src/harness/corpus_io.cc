// src/harness/corpus_io.cc
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

#include "toktx/harness/corpus_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace toktx::harness {

namespace fs = std::filesystem;

namespace {

std::string JoinInts(const std::vector<int> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> SplitInts(const std::string &s) {
  std::vector<int> out;
  std::istringstream in(s);
  int v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw HarnessError("io", "bad integer list '" + s + "'");
  return out;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void WriteFrames(const std::string &path, const quantizer::FrameMatrix &m) {
  static_assert(std::endian::native == std::endian::little, "frame files are little-endian");
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char *>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!out) throw HarnessError("io", "cannot write " + path);
}

quantizer::FrameMatrix ReadFrames(const std::string &path, std::size_t rows, std::size_t dim) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw HarnessError("io", "cannot open " + path);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != rows * dim * sizeof(double))
    throw HarnessError("io", path + ": expected " + std::to_string(rows * dim * sizeof(double)) +
                                 " bytes, found " + std::to_string(bytes));
  quantizer::FrameMatrix m(rows, dim);
  in.seekg(0);
  in.read(reinterpret_cast<char *>(m.data.data()), static_cast<std::streamsize>(bytes));
  return m;
}

}  // namespace

RateSplit SplitRates(const ExperimentConfig &cfg) {
  RateSplit s;
  for (std::size_t r = 0; r < cfg.rate_centers.size(); ++r) {
    const auto bins = quantizer::RateBins(cfg.rate_centers[r], cfg.rate_half_width, cfg.rate_bins);
    for (int b = 0; b < cfg.rate_bins; ++b) {
      const bool test = std::find(cfg.test_bins.begin(), cfg.test_bins.end(), b) != cfg.test_bins.end();
      (test ? s.test : s.train).push_back(bins[b]);
      (test ? s.test_groups : s.train_groups).push_back(static_cast<int>(r) * cfg.rate_bins + b);
    }
  }
  return s;
}

int RateGroup(const ExperimentConfig &cfg, double rate) {
  for (std::size_t r = 0; r < cfg.rate_centers.size(); ++r) {
    const double lo = cfg.rate_centers[r] - cfg.rate_half_width;
    const double w = 2.0 * cfg.rate_half_width / cfg.rate_bins;
    if (rate < lo || rate > lo + cfg.rate_bins * w) continue;
    const int b = std::min(cfg.rate_bins - 1, static_cast<int>(std::floor((rate - lo) / w)));
    return static_cast<int>(r) * cfg.rate_bins + b;
  }
  return -1;
}

void EnsureParentDir(const std::string &path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void WriteText(const std::string &path, const std::string &contents) {
  EnsureParentDir(path);
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw HarnessError("io", "cannot write " + path);
}

void WriteCorpusMeta(const std::string &dir, const CorpusMeta &meta) {
  WriteText(dir + "/meta", "feat_dim = " + std::to_string(meta.feat_dim) +
                               "\ngrammar_seed = " + std::to_string(meta.grammar_seed) +
                               "\nrate_bins = " + std::to_string(meta.rate_bins) + "\n");
}

CorpusMeta ReadCorpusMeta(const std::string &dir) {
  std::ifstream in(dir + "/meta");
  if (!in) throw HarnessError("missing", "no corpus at " + dir + " (run gen-data first)");
  CorpusMeta meta;
  std::string key, eq;
  while (in >> key >> eq) {
    if (eq != "=") throw HarnessError("io", dir + "/meta: malformed line for " + key);
    if (key == "feat_dim") in >> meta.feat_dim;
    else if (key == "grammar_seed") in >> meta.grammar_seed;
    else if (key == "rate_bins") in >> meta.rate_bins;
    else throw HarnessError("io", dir + "/meta: unknown key " + key);
  }
  return meta;
}

void WriteSplit(const std::string &dir, const std::string &split,
                const std::vector<CorpusRecord> &records) {
  fs::create_directories(dir + "/frames");
  std::string tsv = "# id\tgroup\trate\ttext\tgold_tokens\tframes_file\trows\n";
  for (const auto &r : records) {
    WriteFrames(dir + "/" + r.frames_file, r.frames);
    tsv += r.id + "\t" + std::to_string(r.group) + "\t" + FormatDouble(r.rate) + "\t" + JoinInts(r.text) +
           "\t" + JoinInts(r.gold) + "\t" + r.frames_file + "\t" + std::to_string(r.frames.rows) + "\n";
  }
  WriteText(dir + "/" + split + ".tsv", tsv);
}

std::vector<CorpusRecord> ReadSplit(const std::string &dir, const std::string &split) {
  const CorpusMeta meta = ReadCorpusMeta(dir);
  const std::string path = dir + "/" + split + ".tsv";
  std::ifstream in(path);
  if (!in) throw HarnessError("missing", "no split '" + split + "' in " + dir);
  std::vector<CorpusRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 7)
      throw HarnessError("io", path + ":" + std::to_string(line_no) + ": expected 7 columns");
    CorpusRecord r;
    try {
      r.id = cols[0];
      r.group = std::stoi(cols[1]);
      r.rate = std::stod(cols[2]);
      r.text = SplitInts(cols[3]);
      r.gold = SplitInts(cols[4]);
      r.frames_file = cols[5];
      const auto rows = static_cast<std::size_t>(std::stoul(cols[6]));
      if (rows != r.gold.size()) throw HarnessError("io", "frame count differs from gold length");
      r.frames = ReadFrames(dir + "/" + r.frames_file, rows, meta.feat_dim);
    } catch (const std::exception &e) {
      throw HarnessError("io", path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

quantizer::FrameMatrix StackFrames(const std::vector<CorpusRecord> &records) {
  std::size_t rows = 0;
  const std::size_t dim = records.empty() ? 0 : records[0].frames.dim;
  for (const auto &r : records) rows += r.frames.rows;
  quantizer::FrameMatrix m(rows, dim);
  std::size_t at = 0;
  for (const auto &r : records) {
    std::copy(r.frames.data.begin(), r.frames.data.end(), m.data.begin() + at);
    at += r.frames.data.size();
  }
  return m;
}

}  // namespace toktx::harness
