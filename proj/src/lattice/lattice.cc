// src/lattice/lattice.cc
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

#include "toktx/lattice/lattice.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "window_dp.h"

namespace toktx::lattice {

double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

namespace internal {

double WindowAlpha(const WindowLattice &w, std::vector<double> *alpha) {
  alpha->assign(static_cast<std::size_t>(w.U) * w.S, kNegInf);
  auto &a = *alpha;
  for (int u = 0; u < w.U; ++u) {
    for (int s = 0; s < w.S; ++s) {
      const int t = w.lo[u] + s;
      double v = (u == 0 && t == 0) ? 0.0 : kNegInf;
      if (u > 0 && w.Kept(u - 1, t)) v = LogAdd(v, a[w.Cell(u - 1, t)] + w.Blank(u - 1, t));
      if (s > 0) v = LogAdd(v, a[w.Cell(u, t - 1)] + w.Emit(u, t - 1));
      a[w.Cell(u, t)] = v;
    }
  }
  return a[w.Cell(w.U - 1, w.T)] + w.Blank(w.U - 1, w.T);
}

void WindowBeta(const WindowLattice &w, std::vector<double> *beta) {
  beta->assign(static_cast<std::size_t>(w.U) * w.S, kNegInf);
  auto &b = *beta;
  for (int u = w.U - 1; u >= 0; --u) {
    for (int s = w.S - 1; s >= 0; --s) {
      const int t = w.lo[u] + s;
      double v = kNegInf;
      if (u == w.U - 1 && t == w.T) {
        v = w.Blank(u, t);
      } else {
        if (u + 1 < w.U && w.Kept(u + 1, t)) v = LogAdd(v, w.Blank(u, t) + b[w.Cell(u + 1, t)]);
        if (t < w.T && s + 1 < w.S) v = LogAdd(v, w.Emit(u, t) + b[w.Cell(u, t + 1)]);
      }
      b[w.Cell(u, t)] = v;
    }
  }
}

EdgePosteriors WindowPosteriors(const WindowLattice &w) {
  std::vector<double> alpha, beta;
  EdgePosteriors post;
  post.log_z = WindowAlpha(w, &alpha);
  WindowBeta(w, &beta);
  const std::size_t cells = static_cast<std::size_t>(w.U) * w.S;
  post.emit.assign(cells, 0.0);
  post.blank.assign(cells, 0.0);
  if (post.log_z == kNegInf) return post;
  for (int u = 0; u < w.U; ++u) {
    for (int s = 0; s < w.S; ++s) {
      const int t = w.lo[u] + s;
      const std::size_t c = w.Cell(u, t);
      const double a = alpha[c];
      if (a == kNegInf) continue;
      if (u == w.U - 1 && t == w.T) {
        post.blank[c] = std::exp(a + w.Blank(u, t) - post.log_z);
        continue;
      }
      if (u + 1 < w.U && w.Kept(u + 1, t))
        post.blank[c] = std::exp(a + w.Blank(u, t) + beta[w.Cell(u + 1, t)] - post.log_z);
      if (t < w.T && s + 1 < w.S)
        post.emit[c] = std::exp(a + w.Emit(u, t) + beta[w.Cell(u, t + 1)] - post.log_z);
    }
  }
  return post;
}

}  // namespace internal

namespace {

internal::WindowLattice DenseWindow(const JointLogProbs &j, std::span<const int> y,
                                    std::vector<int> *zeros) {
  zeros->assign(j.U, 0);
  return {j.U, j.T, j.V, j.T + 1, zeros->data(), j.logp.data(), y};
}

}  // namespace

void CheckLatticeInputs(int U, int T, int V, std::span<const int> y) {
  if (U < 1) throw std::invalid_argument("lattice: empty text (U = 0)");
  if (T < 0 || static_cast<int>(y.size()) != T)
    throw std::invalid_argument("lattice: token sequence length " + std::to_string(y.size()) +
                                " does not match T = " + std::to_string(T));
  for (int tok : y)
    if (tok < 0 || tok >= V)
      throw std::out_of_range("lattice: token " + std::to_string(tok) + " outside [0, " +
                              std::to_string(V) + ")");
}

JointLogProbs JointLogProbs::Zeros(int U, int T, int V) {
  JointLogProbs j;
  j.U = U;
  j.T = T;
  j.V = V;
  j.logp.assign(static_cast<std::size_t>(U) * (T + 1) * (V + 1), 0.0);
  return j;
}

JointLogProbs JointLogProbs::FromDense(std::span<const double> values, int U, int T, int V) {
  JointLogProbs j = Zeros(U, T, V);
  if (values.size() != j.logp.size())
    throw std::invalid_argument("lattice: dense array of " + std::to_string(values.size()) +
                                " values does not match [U, T+1, V+1]");
  std::copy(values.begin(), values.end(), j.logp.begin());
  return j;
}

double JointLogProbs::MaxNormalizationError() const {
  double worst = 0.0;
  for (int u = 0; u < U; ++u)
    for (int t = 0; t <= T; ++t) {
      double s = kNegInf;
      for (int v = 0; v <= V; ++v) s = LogAdd(s, At(u, t, v));
      worst = std::max(worst, std::abs(s));
    }
  return worst;
}

AlignmentPath PathFromSteps(int U, int T, std::vector<int> steps) {
  AlignmentPath p;
  p.U = U;
  p.T = T;
  p.mask.assign(static_cast<std::size_t>(U) * (T + 1), 0);
  int u = 0, t = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (u >= U || t > T) throw std::out_of_range("alignment path leaves the lattice");
    p.mask[static_cast<std::size_t>(u) * (T + 1) + t] = 1;
    if (steps[i] == AlignmentPath::kBlank)
      ++u;
    else
      ++t;
  }
  p.steps = std::move(steps);
  return p;
}

std::vector<int> RemoveBlanks(std::span<const int> steps) {
  std::vector<int> out;
  for (int s : steps)
    if (s != AlignmentPath::kBlank) out.push_back(s);
  return out;
}

bool IsValidPath(const AlignmentPath &path, std::span<const int> y, std::string *why) {
  auto fail = [why](const std::string &msg) {
    if (why) *why = msg;
    return false;
  };
  const int U = path.U, T = path.T;
  if (static_cast<int>(path.steps.size()) != U + T) return fail("path length is not U + T");
  if (path.steps.empty() || path.steps.back() != AlignmentPath::kBlank)
    return fail("path does not end in blank");
  const auto n_blank = std::count(path.steps.begin(), path.steps.end(), AlignmentPath::kBlank);
  if (n_blank != U) return fail("path does not contain exactly U blanks");
  auto tokens = RemoveBlanks(path.steps);
  if (!std::equal(tokens.begin(), tokens.end(), y.begin(), y.end()))
    return fail("removing blanks does not recover y");
  if (path.mask.size() != static_cast<std::size_t>(U) * (T + 1)) return fail("mask has wrong size");
  // The mask must be exactly the staircase traced by the steps.
  std::vector<uint8_t> expect(path.mask.size(), 0);
  int u = 0, t = 0;
  for (int s : path.steps) {
    expect[static_cast<std::size_t>(u) * (T + 1) + t] = 1;
    if (s == AlignmentPath::kBlank)
      ++u;
    else
      ++t;
  }
  if (expect != path.mask) return fail("mask is not the staircase of the steps");
  // Each row's visited cells are contiguous and start where the previous ended.
  int prev_end = 0;
  for (int r = 0; r < U; ++r) {
    int first = -1, last = -1;
    for (int c = 0; c <= T; ++c)
      if (path.Visited(r, c)) {
        if (first < 0) first = c;
        if (last >= 0 && c != last + 1) return fail("row is not contiguous");
        last = c;
      }
    if (first != prev_end) return fail("row does not start where the previous row ended");
    prev_end = last;
  }
  if (prev_end != T) return fail("path does not reach (U, T)");
  return true;
}

LatticeForward ForwardLoss(const JointLogProbs &j, std::span<const int> y) {
  CheckLatticeInputs(j.U, j.T, j.V, y);
  std::vector<int> zeros;
  auto w = DenseWindow(j, y, &zeros);
  LatticeForward f;
  f.U = j.U;
  f.T = j.T;
  f.log_z = internal::WindowAlpha(w, &f.alpha);
  return f;
}

Occupancy PosteriorOccupancy(const JointLogProbs &j, std::span<const int> y) {
  CheckLatticeInputs(j.U, j.T, j.V, y);
  std::vector<int> zeros;
  auto w = DenseWindow(j, y, &zeros);
  auto post = internal::WindowPosteriors(w);
  Occupancy occ;
  occ.U = j.U;
  occ.T = j.T;
  occ.log_z = post.log_z;
  occ.emit = std::move(post.emit);
  occ.blank = std::move(post.blank);
  occ.node.resize(occ.emit.size());
  for (std::size_t i = 0; i < occ.node.size(); ++i) occ.node[i] = occ.emit[i] + occ.blank[i];
  return occ;
}

AlignmentPath ViterbiAlign(const JointLogProbs &j, std::span<const int> y) {
  CheckLatticeInputs(j.U, j.T, j.V, y);
  const int U = j.U, T = j.T;
  const std::size_t cols = T + 1;
  std::vector<double> best(static_cast<std::size_t>(U) * cols, kNegInf);
  // 1 if the best arrival at (u, t) was an emission from (u, t-1).
  std::vector<uint8_t> from_emit(best.size(), 0);
  for (int u = 0; u < U; ++u)
    for (int t = 0; t <= T; ++t) {
      double v = (u == 0 && t == 0) ? 0.0 : kNegInf;
      uint8_t e = 0;
      if (u > 0) {
        double c = best[(u - 1) * cols + t] + j.Blank(u - 1, t);
        if (c > v) v = c;
      }
      if (t > 0) {
        double c = best[u * cols + t - 1] + j.Emit(u, t - 1, y[t - 1]);
        if (c > v) {
          v = c;
          e = 1;
        }
      }
      best[u * cols + t] = v;
      from_emit[u * cols + t] = e;
    }
  std::vector<int> steps{AlignmentPath::kBlank};
  int u = U - 1, t = T;
  while (u > 0 || t > 0) {
    if (from_emit[u * cols + t]) {
      steps.push_back(y[t - 1]);
      --t;
    } else {
      steps.push_back(AlignmentPath::kBlank);
      --u;
    }
  }
  std::reverse(steps.begin(), steps.end());
  AlignmentPath p = PathFromSteps(U, T, std::move(steps));
  p.log_prob = best[(U - 1) * cols + T] + j.Blank(U - 1, T);
  return p;
}

void ForEachPath(const JointLogProbs &j, std::span<const int> y,
                 const std::function<void(const std::vector<int> &, double)> &visit) {
  CheckLatticeInputs(j.U, j.T, j.V, y);
  if (j.U + j.T > 24)
    throw std::invalid_argument("enumerate_paths: U + T = " + std::to_string(j.U + j.T) +
                                " exceeds the enumeration limit of 24");
  std::vector<int> steps;
  std::function<void(int, int, double)> walk = [&](int u, int t, double lp) {
    if (u == j.U - 1 && t == j.T) {
      steps.push_back(AlignmentPath::kBlank);
      visit(steps, lp + j.Blank(u, t));
      steps.pop_back();
      return;
    }
    if (t < j.T) {
      steps.push_back(y[t]);
      walk(u, t + 1, lp + j.Emit(u, t, y[t]));
      steps.pop_back();
    }
    if (u < j.U - 1) {
      steps.push_back(AlignmentPath::kBlank);
      walk(u + 1, t, lp + j.Blank(u, t));
      steps.pop_back();
    }
  };
  walk(0, 0, 0.0);
}

double EnumeratePaths(const JointLogProbs &j, std::span<const int> y, std::uint64_t *num_paths) {
  double total = kNegInf;
  std::uint64_t n = 0;
  ForEachPath(j, y, [&](const std::vector<int> &, double lp) {
    total = LogAdd(total, lp);
    ++n;
  });
  if (num_paths) *num_paths = n;
  return total;
}

grad::Tensor TransducerLogLikelihood(const grad::Tensor &log_probs, std::span<const int> y) {
  if (log_probs.rank() != 3)
    throw grad::ShapeError("transducer_loss: expected [U, T+1, V+1], got " +
                           grad::ShapeString(log_probs.shape()));
  const int U = static_cast<int>(log_probs.dim(0));
  const int T = static_cast<int>(log_probs.dim(1)) - 1;
  const int V = static_cast<int>(log_probs.dim(2)) - 1;
  if (T < 0 || V < 1)
    throw grad::ShapeError("transducer_loss: degenerate lattice shape " +
                           grad::ShapeString(log_probs.shape()));
  CheckLatticeInputs(U, T, V, y);
  auto zeros = std::make_shared<std::vector<int>>(U, 0);
  std::vector<int> ys(y.begin(), y.end());
  internal::WindowLattice w{U, T, V, T + 1, zeros->data(), log_probs.data().data(), ys};
  std::vector<double> alpha;
  const double log_z = internal::WindowAlpha(w, &alpha);

  grad::Tensor out = grad::Tensor::Scalar(log_z);
  if (grad::GradEnabled() && log_probs.requires_grad()) {
    auto node = std::make_shared<grad::Node>();
    node->op = "transducer_loss";
    node->inputs.push_back(log_probs.shared_impl());
    grad::TensorImpl *in = log_probs.impl();
    node->backward = [in, U, T, V, zeros, ys = std::move(ys)](grad::TensorImpl &o) {
      internal::WindowLattice w{U, T, V, T + 1, zeros->data(), in->data.data(), ys};
      auto post = internal::WindowPosteriors(w);
      auto &g = in->GradBuffer();
      const double go = o.grad[0];
      for (int u = 0; u < U; ++u)
        for (int t = 0; t <= T; ++t) {
          const std::size_t c = w.Cell(u, t);
          if (t < T) g[c * (V + 1) + ys[t]] += go * post.emit[c];
          g[c * (V + 1) + V] += go * post.blank[c];
        }
    };
    out.impl()->node = std::move(node);
    out.set_requires_grad(true);
  }
  return out;
}

}  // namespace toktx::lattice
