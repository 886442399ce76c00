// src/lattice/window_dp.h
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

#ifndef TOKTX_SRC_LATTICE_WINDOW_DP_H_
#define TOKTX_SRC_LATTICE_WINDOW_DP_H_

#include <span>
#include <vector>

#include "toktx/lattice/lattice.h"

namespace toktx::lattice::internal {

// A lattice restricted to S consecutive nodes per row starting at lo[u].  The
// dense lattice is the case S = T + 1, lo = 0.
struct WindowLattice {
  int U;
  int T;
  int V;
  int S;
  const int *lo;         // [U]
  const double *logp;    // [U][S][V+1]
  std::span<const int> y;

  bool Kept(int u, int t) const { return t >= lo[u] && t < lo[u] + S; }
  std::size_t Cell(int u, int t) const {
    return static_cast<std::size_t>(u) * S + (t - lo[u]);
  }
  double Emit(int u, int t) const { return logp[Cell(u, t) * (V + 1) + y[t]]; }
  double Blank(int u, int t) const { return logp[Cell(u, t) * (V + 1) + V]; }
};

// alpha over kept cells ([U][S]); returns log P(y|x).
double WindowAlpha(const WindowLattice &w, std::vector<double> *alpha);
// beta(u, t): log probability of finishing from (u, t), including its own
// outgoing arc.
void WindowBeta(const WindowLattice &w, std::vector<double> *beta);

// Edge posteriors per kept cell, from alpha/beta.
struct EdgePosteriors {
  std::vector<double> emit;   // [U][S]
  std::vector<double> blank;  // [U][S]
  double log_z;
};
EdgePosteriors WindowPosteriors(const WindowLattice &w);

}  // namespace toktx::lattice::internal

#endif  // TOKTX_SRC_LATTICE_WINDOW_DP_H_
