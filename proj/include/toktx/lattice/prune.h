// include/toktx/lattice/prune.h
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

#ifndef TOKTX_LATTICE_PRUNE_H_
#define TOKTX_LATTICE_PRUNE_H_

#include <span>
#include <string>
#include <vector>

#include "toktx/grad/tensor.h"
#include "toktx/lattice/lattice.h"

namespace toktx::lattice {

// Row u keeps the S nodes t = lo[u] .. lo[u] + S - 1.
//
// A valid set of bounds keeps both end nodes and lets every kept node reach
// the next row: lo[0] = 0, lo[U-1] = T+1-S, lo non-decreasing and
// lo[u+1] - lo[u] <= S - 1 (consecutive windows must overlap by one node
// for a blank to cross between them).
struct PruneBounds {
  int S = 0;
  std::vector<int> lo;
  // Set when the requested S could not be used as given: S >= T+1 collapses
  // to the full lattice, and S too small to climb T within U rows is raised
  // to the smallest feasible width.
  bool adjusted = false;

  int U() const { return static_cast<int>(lo.size()); }
  bool Contains(int u, int t) const { return t >= lo[u] && t < lo[u] + S; }
  // Throws std::invalid_argument naming the violated condition.
  void Validate(int T) const;
  // Full coverage for S = T + 1.
  static PruneBounds Full(int U, int T);
};

// Smallest S for which a valid set of bounds exists.
int MinFeasibleS(int U, int T);

// Width-S windows placed on the occupancy mass.  Regions are nested: the
// region for S lies inside the region for S + 1, so the pruned loss can only
// improve as S grows.  The nodes of `best` (may be null) are kept for every
// S >= K, where K is the smallest width >= the widest row of `best` at which
// windows holding the path can still nest windows of the minimum feasible
// width.
PruneBounds BoundsFromOccupancy(const Occupancy &occ, const AlignmentPath *best, int S);

struct SimpleLossResult {
  grad::Tensor loss;   // -log P(y|x) of the simple lattice, differentiable
  PruneBounds bounds;
  Occupancy occupancy;
  AlignmentPath best;
};

// Lattice whose node logits are enc_proj[u] + pred_proj[t] (both already
// projected to V+1 outputs), log-normalized per node.  Returns its exact loss
// and bounds from BoundsFromOccupancy.  Requires S >= 2.
SimpleLossResult SimpleLossAndBounds(const grad::Tensor &enc_proj, const grad::Tensor &pred_proj,
                                     std::span<const int> y, int S);

// Pruned lattice values: row u holds nodes lo[u] .. lo[u]+S-1, each a V+1
// log-distribution (blank last).
struct PrunedLogProbs {
  int U = 0;
  int T = 0;
  int V = 0;
  PruneBounds bounds;
  std::vector<double> logp;  // [U][S][V+1]

  // Copies the kept nodes of a dense lattice.
  static PrunedLogProbs FromDense(const JointLogProbs &j, const PruneBounds &bounds);
};

// Forward recursion over the kept nodes only; paths that leave the region
// contribute nothing.  Work and memory are O(U * S).
LatticeForward PrunedForward(const PrunedLogProbs &p, std::span<const int> y);

// Differentiable log-likelihood over a [U, S, V+1] tensor laid out as in
// PrunedLogProbs.
grad::Tensor PrunedLogLikelihood(const grad::Tensor &log_probs, const PruneBounds &bounds,
                                 int T, std::span<const int> y);

}  // namespace toktx::lattice

#endif  // TOKTX_LATTICE_PRUNE_H_
