// include/toktx/lattice/lattice.h
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

#ifndef TOKTX_LATTICE_LATTICE_H_
#define TOKTX_LATTICE_LATTICE_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "toktx/grad/tensor.h"

// The transducer alignment lattice.
//
// Text positions u = 1..U are stored in row u-1; output positions t = 0..T
// are stored in column t, with t = 0 the <SOS> column.  Each node (u, t)
// carries a distribution over V tokens plus blank; emitting y_{t+1} moves to
// (u, t+1) and blank moves to (u+1, t).  A path starts at (1, 0) and ends
// with the blank that leaves (U, T).
//
// All dynamic programming runs in log space.
namespace toktx::lattice {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b);

// Per-node log-probabilities over V tokens plus blank; blank is the last of
// the V+1 entries of each node.
struct JointLogProbs {
  int U = 0;
  int T = 0;
  int V = 0;
  std::vector<double> logp;  // [U][T+1][V+1]

  static JointLogProbs Zeros(int U, int T, int V);
  // From a dense [U, T+1, V+1] array.
  static JointLogProbs FromDense(std::span<const double> values, int U, int T, int V);

  double &At(int u, int t, int v) { return logp[Index(u, t) + v]; }
  double At(int u, int t, int v) const { return logp[Index(u, t) + v]; }
  double Emit(int u, int t, int token) const { return At(u, t, token); }
  double Blank(int u, int t) const { return At(u, t, V); }

  // max |logsumexp(node) - 0| over all nodes.
  double MaxNormalizationError() const;

 private:
  std::size_t Index(int u, int t) const {
    return (static_cast<std::size_t>(u) * (T + 1) + t) * (V + 1);
  }
};

struct LatticeForward {
  int U = 0;
  int T = 0;
  std::vector<double> alpha;  // [U][T+1], log alpha(u, t)
  double log_z = kNegInf;     // log P(y|x) = alpha(U, T) + blank(U, T)

  double Alpha(int u, int t) const { return alpha[static_cast<std::size_t>(u) * (T + 1) + t]; }
};

struct Occupancy {
  int U = 0;
  int T = 0;
  double log_z = kNegInf;
  std::vector<double> node;   // [U][T+1], P(path visits (u, t) | x, y)
  std::vector<double> emit;   // [U][T+1], P(path emits y_{t+1} at (u, t))
  std::vector<double> blank;  // [U][T+1], P(path takes blank at (u, t))

  double Node(int u, int t) const { return node[static_cast<std::size_t>(u) * (T + 1) + t]; }
};

// A monotonic path through the lattice.
struct AlignmentPath {
  static constexpr int kBlank = -1;

  int U = 0;
  int T = 0;
  std::vector<int> steps;     // tokens and kBlank, length U + T, ending in kBlank
  std::vector<uint8_t> mask;  // [U][T+1], 1 on visited nodes
  double log_prob = kNegInf;

  uint8_t Visited(int u, int t) const { return mask[static_cast<std::size_t>(u) * (T + 1) + t]; }
};

// Builds the node mask for `steps` starting at (1, 0).  Throws if the steps
// leave the U x (T+1) grid.
AlignmentPath PathFromSteps(int U, int T, std::vector<int> steps);
// The removal function: drops every blank.
std::vector<int> RemoveBlanks(std::span<const int> steps);
// Checks the path invariants against `y`; on failure returns false and fills
// `why` when given.
bool IsValidPath(const AlignmentPath &path, std::span<const int> y, std::string *why = nullptr);

LatticeForward ForwardLoss(const JointLogProbs &j, std::span<const int> y);
// Visit probabilities by forward-backward.
Occupancy PosteriorOccupancy(const JointLogProbs &j, std::span<const int> y);
AlignmentPath ViterbiAlign(const JointLogProbs &j, std::span<const int> y);

// Direct sum over every interleaving of U blanks and T emissions.  Requires
// U + T <= 24.  `num_paths`, when given, receives the number of paths summed.
double EnumeratePaths(const JointLogProbs &j, std::span<const int> y,
                      std::uint64_t *num_paths = nullptr);
// Calls `visit(steps, log_prob)` for every path, in lexicographic order with
// emissions before blanks.
void ForEachPath(const JointLogProbs &j, std::span<const int> y,
                 const std::function<void(const std::vector<int> &, double)> &visit);

// Differentiable log P(y|x) from a [U, T+1, V+1] log-probability tensor
// (blank last).  The gradient w.r.t. each used entry is its edge posterior.
grad::Tensor TransducerLogLikelihood(const grad::Tensor &log_probs, std::span<const int> y);

// Shared argument checks: U >= 1, tokens within [0, V).
void CheckLatticeInputs(int U, int T, int V, std::span<const int> y);

}  // namespace toktx::lattice

#endif  // TOKTX_LATTICE_LATTICE_H_
