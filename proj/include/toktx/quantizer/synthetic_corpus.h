// include/toktx/quantizer/synthetic_corpus.h
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

#ifndef TOKTX_QUANTIZER_SYNTHETIC_CORPUS_H_
#define TOKTX_QUANTIZER_SYNTHETIC_CORPUS_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "toktx/quantizer/codebook.h"

// Synthetic stand-in for speech embeddings.  A text is a sequence of symbols;
// each symbol s expands to round(rate * n_sym(s)) frames, the first drawn
// around the onset unit of s and the rest around its sustain unit.  Frames
// are unit centroids plus isotropic Gaussian noise.
namespace toktx::quantizer {

inline constexpr int kNumSymbols = 16;
inline constexpr int kNumUnits = 2 * kNumSymbols;

class Grammar {
 public:
  // Unit centroids are drawn from `seed`, rejecting draws until every pair is
  // at least `min_gap` apart.
  explicit Grammar(std::size_t feat_dim = 16, std::uint64_t seed = 7, double min_gap = 3.0);

  static int Expansion(int symbol);  // n_sym, one of 1, 2, 3
  static int OnsetUnit(int symbol) { return symbol; }
  static int SustainUnit(int symbol) { return kNumSymbols + symbol; }
  static int FramesFor(int symbol, double rate);

  // Gold unit sequence for `text` at `rate`.
  static std::vector<int> Expand(std::span<const int> text, double rate);
  // Symbols recovered from onset units; sustain units are skipped.
  static std::vector<int> Invert(std::span<const int> units);

  const FrameMatrix &centroids() const { return centroids_; }
  std::size_t feat_dim() const { return centroids_.dim; }
  double MinGap() const;

 private:
  FrameMatrix centroids_;  // [kNumUnits, feat_dim]
};

struct SyntheticUtterance {
  std::vector<int> text;
  double rate = 1.0;
  FrameMatrix frames;            // [L, feat_dim]
  std::vector<int> gold_tokens;  // generating unit of each frame
};

// Closed interval of rates.
struct RateInterval {
  double lo = 1.0;
  double hi = 1.0;
};

struct CorpusOptions {
  int n_utts = 100;
  int min_text_len = 3;
  int max_text_len = 8;
  // Each utterance picks an interval with probability proportional to its
  // width (uniformly when all are points), then a rate uniformly inside it.
  std::vector<RateInterval> rates{{0.85, 1.15}};
  double noise_sigma = 0.1;
  std::uint64_t seed = 1;
};

// Deterministic given the options and the grammar.  Throws
// std::invalid_argument for rates outside [0.5, 3.0] or bad lengths.
std::vector<SyntheticUtterance> GenerateCorpus(const CorpusOptions &opts, const Grammar &grammar);

// Splits [center - half_width, center + half_width] into `bins` equal bins.
std::vector<RateInterval> RateBins(double center, double half_width, int bins);

}  // namespace toktx::quantizer

#endif  // TOKTX_QUANTIZER_SYNTHETIC_CORPUS_H_
