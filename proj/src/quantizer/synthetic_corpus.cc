// src/quantizer/synthetic_corpus.cc
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

#include "toktx/quantizer/synthetic_corpus.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace toktx::quantizer {

namespace {

constexpr std::array<int, kNumSymbols> kExpansion = {1, 2, 3, 2, 1, 3, 2, 2, 3, 1, 2, 3, 1, 2, 3, 2};

double Uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Grammar::Grammar(std::size_t feat_dim, std::uint64_t seed, double min_gap)
    : centroids_(kNumUnits, feat_dim) {
  if (feat_dim == 0) throw std::invalid_argument("feature dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < kNumUnits; ++j) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw std::runtime_error("cannot place unit centroids with the requested gap");
      auto row = centroids_.Row(j);
      for (double &v : row) v = normal(rng);
      bool ok = true;
      for (int i = 0; i < j && ok; ++i) ok = SquaredDistance(row, centroids_.Row(i)) >= min_gap * min_gap;
      if (ok) break;
    }
  }
}

int Grammar::Expansion(int symbol) {
  if (symbol < 0 || symbol >= kNumSymbols) throw std::out_of_range("unknown symbol " + std::to_string(symbol));
  return kExpansion[symbol];
}

int Grammar::FramesFor(int symbol, double rate) {
  return static_cast<int>(std::lround(rate * Expansion(symbol)));
}

std::vector<int> Grammar::Expand(std::span<const int> text, double rate) {
  std::vector<int> units;
  for (int s : text) {
    const int n = FramesFor(s, rate);
    for (int i = 0; i < n; ++i) units.push_back(i == 0 ? OnsetUnit(s) : SustainUnit(s));
  }
  return units;
}

std::vector<int> Grammar::Invert(std::span<const int> units) {
  std::vector<int> text;
  for (int u : units)
    if (u >= 0 && u < kNumSymbols) text.push_back(u);
  return text;
}

double Grammar::MinGap() const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kNumUnits; ++i)
    for (int j = i + 1; j < kNumUnits; ++j)
      best = std::min(best, SquaredDistance(centroids_.Row(i), centroids_.Row(j)));
  return std::sqrt(best);
}

std::vector<SyntheticUtterance> GenerateCorpus(const CorpusOptions &opts, const Grammar &grammar) {
  if (opts.min_text_len < 1 || opts.max_text_len < opts.min_text_len)
    throw std::invalid_argument("bad text length range");
  if (opts.rates.empty()) throw std::invalid_argument("no rate intervals");
  double total_width = 0.0;
  for (const auto &r : opts.rates) {
    if (!(r.lo >= 0.5 && r.hi <= 3.0 && r.lo <= r.hi))
      throw std::invalid_argument("rate interval must lie within [0.5, 3.0]");
    total_width += r.hi - r.lo;
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> noise(0.0, opts.noise_sigma);
  const std::size_t dim = grammar.feat_dim();

  std::vector<SyntheticUtterance> corpus;
  corpus.reserve(opts.n_utts);
  for (int n = 0; n < opts.n_utts; ++n) {
    SyntheticUtterance utt;
    const int len = opts.min_text_len +
                    static_cast<int>(Uniform01(rng) * (opts.max_text_len - opts.min_text_len + 1));
    for (int i = 0; i < len; ++i) utt.text.push_back(static_cast<int>(Uniform01(rng) * kNumSymbols));

    std::size_t pick = 0;
    if (total_width > 0.0) {
      double r = Uniform01(rng) * total_width;
      pick = opts.rates.size() - 1;
      for (std::size_t i = 0; i < opts.rates.size(); ++i) {
        const double w = opts.rates[i].hi - opts.rates[i].lo;
        if (r < w) {
          pick = i;
          break;
        }
        r -= w;
      }
    } else {
      pick = static_cast<std::size_t>(Uniform01(rng) * opts.rates.size());
    }
    const auto &ri = opts.rates[pick];
    utt.rate = ri.lo + Uniform01(rng) * (ri.hi - ri.lo);

    utt.gold_tokens = Grammar::Expand(utt.text, utt.rate);
    utt.frames = FrameMatrix(utt.gold_tokens.size(), dim);
    for (std::size_t t = 0; t < utt.gold_tokens.size(); ++t) {
      auto c = grammar.centroids().Row(utt.gold_tokens[t]);
      auto row = utt.frames.Row(t);
      for (std::size_t d = 0; d < dim; ++d) row[d] = c[d] + noise(rng);
    }
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

std::vector<RateInterval> RateBins(double center, double half_width, int bins) {
  if (bins < 1) throw std::invalid_argument("need at least one rate bin");
  std::vector<RateInterval> out;
  const double w = 2.0 * half_width / bins;
  for (int b = 0; b < bins; ++b)
    out.push_back({center - half_width + b * w, center - half_width + (b + 1) * w});
  return out;
}

}  // namespace toktx::quantizer
