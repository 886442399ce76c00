// src/lattice/prune.cc
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

#include "toktx/lattice/prune.h"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <stdexcept>

#include "toktx/grad/ops.h"
#include "window_dp.h"

namespace toktx::lattice {

void PruneBounds::Validate(int T) const {
  const int U = this->U();
  auto fail = [](const std::string &msg) { throw std::invalid_argument("prune bounds: " + msg); };
  if (U < 1) fail("no rows");
  if (S < 1 || S > T + 1) fail("width S = " + std::to_string(S) + " outside [1, T+1]");
  if (lo[0] != 0) fail("first row does not start at t = 0");
  if (lo[U - 1] != T + 1 - S) fail("last row does not reach t = T");
  for (int u = 0; u < U; ++u) {
    if (lo[u] < 0 || lo[u] > T + 1 - S) fail("row " + std::to_string(u) + " out of range");
    if (u > 0 && lo[u] < lo[u - 1]) fail("row " + std::to_string(u) + " moves backwards");
    if (u > 0 && lo[u] - lo[u - 1] > S - 1)
      fail("row " + std::to_string(u) + " is unreachable from the previous row");
  }
}

PruneBounds PruneBounds::Full(int U, int T) {
  PruneBounds b;
  b.S = T + 1;
  b.lo.assign(U, 0);
  return b;
}

int MinFeasibleS(int U, int T) {
  if (U < 1) throw std::invalid_argument("prune bounds: U must be positive");
  return std::max(2, (T + U - 1) / U + 1);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-wise prefix sums of node occupancy.
struct RowMass {
  int T;
  std::vector<double> pre;  // [U][T+2]

  explicit RowMass(const Occupancy &occ) : T(occ.T), pre(static_cast<std::size_t>(occ.U) * (T + 2)) {
    for (int u = 0; u < occ.U; ++u)
      for (int t = 0; t <= T; ++t) At(u, t + 1) = At(u, t) + occ.Node(u, t);
  }
  double &At(int u, int t) { return pre[static_cast<std::size_t>(u) * (T + 2) + t]; }
  double Window(int u, int lo, int S) const {
    const std::size_t r = static_cast<std::size_t>(u) * (T + 2);
    return pre[r + lo + S] - pre[r + lo];
  }
};

// Highest-mass valid width-S bounds with lo[u] in [lower[u], upper[u]] and
// steps of at most `max_step`.  Returns false when none exist.
bool BestWindows(const RowMass &mass, int U, int T, int S, int max_step,
                 const std::vector<int> &lower, const std::vector<int> &upper,
                 std::vector<int> *lo) {
  const int n = T + 2 - S;  // candidate starts 0 .. T+1-S
  std::vector<double> score(static_cast<std::size_t>(U) * n, -kInf);
  std::vector<int> from(score.size(), -1);
  auto allowed = [&](int u, int x) { return x >= lower[u] && x <= upper[u]; };
  if (allowed(0, 0)) score[0] = mass.Window(0, 0, S);
  for (int u = 1; u < U; ++u)
    for (int x = 0; x < n; ++x) {
      if (!allowed(u, x)) continue;
      double best = -kInf;
      int arg = -1;
      for (int p = std::max(0, x - max_step); p <= x; ++p)
        if (score[(u - 1) * n + p] > best) {
          best = score[(u - 1) * n + p];
          arg = p;
        }
      if (arg < 0) continue;
      score[u * n + x] = best + mass.Window(u, x, S);
      from[u * n + x] = arg;
    }
  int x = n - 1;
  if (score[(U - 1) * n + x] == -kInf) return false;
  lo->assign(U, 0);
  for (int u = U - 1; u >= 0; --u) {
    (*lo)[u] = x;
    x = from[u * n + x];
  }
  return true;
}

// One shrink step S -> S-1: every row drops either its lowest node (d = 1)
// or its highest (d = 0), keeping the width-`inner_S` region `inner` inside.
// The choice is a two-state chain over rows minimizing dropped occupancy.
void ShrinkByOne(const Occupancy &occ, const std::vector<int> &inner, int inner_S, PruneBounds *b) {
  const int U = b->U(), S = b->S;
  auto cost_of = [&](int u, int d) {
    const int lo = b->lo[u] + d;
    if (lo > inner[u] || lo + S - 2 < inner[u] + inner_S - 1) return kInf;
    return occ.Node(u, d ? b->lo[u] : b->lo[u] + S - 1);
  };
  std::vector<std::array<double, 2>> cost(U);
  std::vector<std::array<int, 2>> from(U, {0, 0});
  cost[0] = {cost_of(0, 0), kInf};  // row 0 keeps t = 0
  for (int u = 1; u < U; ++u) {
    const int step = b->lo[u] - b->lo[u - 1];
    for (int d = 0; d < 2; ++d) {
      cost[u][d] = kInf;
      const double own = cost_of(u, d);
      if (own == kInf) continue;
      for (int p = 0; p < 2; ++p) {
        const int new_step = step + d - p;
        if (new_step < 0 || new_step > S - 2 || cost[u - 1][p] == kInf) continue;
        if (cost[u - 1][p] + own < cost[u][d]) {
          cost[u][d] = cost[u - 1][p] + own;
          from[u][d] = p;
        }
      }
    }
  }
  // Row U-1 keeps t = T, so it drops its lowest node.
  if (cost[U - 1][1] == kInf) throw std::logic_error("prune bounds: no nested shrink exists");
  for (int u = U - 1, d = 1; u >= 0; --u) {
    const int prev = from[u][d];
    b->lo[u] += d;
    d = prev;
  }
  --b->S;
}

}  // namespace

PruneBounds BoundsFromOccupancy(const Occupancy &occ, const AlignmentPath *best, int S) {
  const int U = occ.U, T = occ.T;
  if (S < 2) throw std::invalid_argument("prune bounds: S must be at least 2");
  PruneBounds b = PruneBounds::Full(U, T);
  const int m = std::min(MinFeasibleS(U, T), T + 1);
  if (S < m) {
    S = m;
    b.adjusted = true;
  }
  if (S > T + 1) b.adjusted = true;
  S = std::min(S, T + 1);
  if (S == T + 1) return b;

  // Two anchors: the best width-m windows, and width-K windows holding both
  // them and the protected path.  K starts at the widest row of the path and
  // grows only when no width-m windows can nest inside windows holding the
  // path.  Every width is then reached by shrinking from full coverage around
  // the anchors, so the region for S lies inside the region for S + 1.
  const RowMass mass(occ);
  std::vector<int> first(U, T + 1), last(U, -1);
  int K = m;
  if (best) {
    for (int u = 0; u < U; ++u)
      for (int t = 0; t <= T; ++t)
        if (best->Visited(u, t)) {
          first[u] = std::min(first[u], t);
          last[u] = t;
        }
    for (int u = 0; u < U; ++u) K = std::max(K, last[u] - first[u] + 1);
  }
  std::vector<int> lo_m, lo_k, lower(U), upper(U);
  for (; K <= T + 1; ++K) {
    for (int u = 0; u < U; ++u) {
      lower[u] = last[u] - K + 1;
      upper[u] = first[u] + K - m;
    }
    if (BestWindows(mass, U, T, m, m - 1, lower, upper, &lo_m)) break;
  }
  for (int u = 0; u < U; ++u) {
    lower[u] = std::max(last[u], lo_m[u] + m - 1) - K + 1;
    upper[u] = std::min(first[u], lo_m[u]);
  }
  if (!BestWindows(mass, U, T, K, K - 1, lower, upper, &lo_k))
    throw std::logic_error("prune bounds: anchor windows do not nest");

  while (b.S > S) {
    if (b.S - 1 >= K)
      ShrinkByOne(occ, lo_k, K, &b);
    else
      ShrinkByOne(occ, lo_m, m, &b);
  }
  return b;
}

SimpleLossResult SimpleLossAndBounds(const grad::Tensor &enc_proj, const grad::Tensor &pred_proj,
                                     std::span<const int> y, int S) {
  if (S < 2) throw std::invalid_argument("simple_loss: S must be at least 2");
  if (enc_proj.rank() != 2 || pred_proj.rank() != 2 || enc_proj.dim(1) != pred_proj.dim(1))
    throw grad::ShapeError("simple_loss", enc_proj.shape(), pred_proj.shape());
  const int U = static_cast<int>(enc_proj.dim(0));
  const int T = static_cast<int>(pred_proj.dim(0)) - 1;
  const int V = static_cast<int>(enc_proj.dim(1)) - 1;
  CheckLatticeInputs(U, T, V, y);

  std::vector<int> rows_u, rows_t;
  rows_u.reserve(static_cast<std::size_t>(U) * (T + 1));
  rows_t.reserve(rows_u.capacity());
  for (int u = 0; u < U; ++u)
    for (int t = 0; t <= T; ++t) {
      rows_u.push_back(u);
      rows_t.push_back(t);
    }
  using namespace grad;
  Tensor logits = Add(Gather(enc_proj, rows_u), Gather(pred_proj, rows_t));
  Tensor logp = Reshape(LogSoftmax(logits), {static_cast<std::size_t>(U),
                                              static_cast<std::size_t>(T + 1),
                                              static_cast<std::size_t>(V + 1)});
  SimpleLossResult r;
  r.loss = Scale(TransducerLogLikelihood(logp, y), -1.0);

  const JointLogProbs j = JointLogProbs::FromDense(logp.data(), U, T, V);
  r.occupancy = PosteriorOccupancy(j, y);
  r.best = ViterbiAlign(j, y);
  r.bounds = BoundsFromOccupancy(r.occupancy, &r.best, S);
  return r;
}

PrunedLogProbs PrunedLogProbs::FromDense(const JointLogProbs &j, const PruneBounds &bounds) {
  bounds.Validate(j.T);
  if (bounds.U() != j.U) throw std::invalid_argument("prune bounds: row count does not match U");
  PrunedLogProbs p;
  p.U = j.U;
  p.T = j.T;
  p.V = j.V;
  p.bounds = bounds;
  p.logp.reserve(static_cast<std::size_t>(j.U) * bounds.S * (j.V + 1));
  for (int u = 0; u < j.U; ++u)
    for (int s = 0; s < bounds.S; ++s)
      for (int v = 0; v <= j.V; ++v) p.logp.push_back(j.At(u, bounds.lo[u] + s, v));
  return p;
}

LatticeForward PrunedForward(const PrunedLogProbs &p, std::span<const int> y) {
  CheckLatticeInputs(p.U, p.T, p.V, y);
  p.bounds.Validate(p.T);
  internal::WindowLattice w{p.U, p.T, p.V, p.bounds.S, p.bounds.lo.data(), p.logp.data(), y};
  std::vector<double> window;
  LatticeForward f;
  f.U = p.U;
  f.T = p.T;
  f.log_z = internal::WindowAlpha(w, &window);
  f.alpha.assign(static_cast<std::size_t>(p.U) * (p.T + 1), kNegInf);
  for (int u = 0; u < p.U; ++u)
    for (int s = 0; s < w.S; ++s) {
      const int t = w.lo[u] + s;
      f.alpha[static_cast<std::size_t>(u) * (p.T + 1) + t] = window[w.Cell(u, t)];
    }
  return f;
}

grad::Tensor PrunedLogLikelihood(const grad::Tensor &log_probs, const PruneBounds &bounds, int T,
                                 std::span<const int> y) {
  bounds.Validate(T);
  const int U = bounds.U(), S = bounds.S;
  if (log_probs.rank() != 3 || static_cast<int>(log_probs.dim(0)) != U ||
      static_cast<int>(log_probs.dim(1)) != S)
    throw grad::ShapeError("pruned_loss: expected [U, S, V+1] with U = " + std::to_string(U) +
                           ", S = " + std::to_string(S) + ", got " +
                           grad::ShapeString(log_probs.shape()));
  const int V = static_cast<int>(log_probs.dim(2)) - 1;
  CheckLatticeInputs(U, T, V, y);

  auto lo = std::make_shared<std::vector<int>>(bounds.lo);
  std::vector<int> ys(y.begin(), y.end());
  internal::WindowLattice w{U, T, V, S, lo->data(), log_probs.data().data(), ys};
  std::vector<double> alpha;
  grad::Tensor out = grad::Tensor::Scalar(internal::WindowAlpha(w, &alpha));
  if (grad::GradEnabled() && log_probs.requires_grad()) {
    auto node = std::make_shared<grad::Node>();
    node->op = "pruned_loss";
    node->inputs.push_back(log_probs.shared_impl());
    grad::TensorImpl *in = log_probs.impl();
    node->backward = [in, U, T, V, S, lo, ys = std::move(ys)](grad::TensorImpl &o) {
      internal::WindowLattice w{U, T, V, S, lo->data(), in->data.data(), ys};
      auto post = internal::WindowPosteriors(w);
      auto &g = in->GradBuffer();
      const double go = o.grad[0];
      for (int u = 0; u < U; ++u)
        for (int s = 0; s < S; ++s) {
          const int t = (*lo)[u] + s;
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
