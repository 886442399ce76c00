// tests/lattice_test.cc
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <sstream>

#include "test_util.h"
#include "toktx/grad/ops.h"
#include "toktx/lattice/dump.h"
#include "toktx/lattice/lattice.h"
#include "toktx/lattice/prune.h"

using namespace toktx::lattice;
using toktx::grad::NoGradGuard;
using toktx::grad::Tensor;
using toktx::testing::CentralDiff;
using toktx::testing::RandomLattice;
using toktx::testing::RandomTensor;
using toktx::testing::RandomTokens;
using toktx::testing::RelErr;

namespace {

std::uint64_t Binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

JointLogProbs Uniform(int U, int T, int V) {
  auto j = JointLogProbs::Zeros(U, T, V);
  for (double &v : j.logp) v = -std::log(V + 1.0);
  return j;
}

// Visit probabilities by brute force: sum of path probabilities over the
// paths whose staircase passes each node.
std::vector<double> EnumeratedOccupancy(const JointLogProbs &j, const std::vector<int> &y) {
  const double log_z = EnumeratePaths(j, y);
  std::vector<double> occ(static_cast<std::size_t>(j.U) * (j.T + 1), 0.0);
  ForEachPath(j, y, [&](const std::vector<int> &steps, double lp) {
    auto path = PathFromSteps(j.U, j.T, steps);
    for (std::size_t i = 0; i < occ.size(); ++i)
      if (path.mask[i]) occ[i] += std::exp(lp - log_z);
  });
  return occ;
}

// Random valid bounds of width S by a random monotone walk.
PruneBounds RandomBounds(std::mt19937_64 &rng, int U, int T, int S) {
  PruneBounds b;
  b.S = S;
  b.lo.assign(U, 0);
  for (int u = 1; u < U; ++u) {
    const int need = T + 1 - S - b.lo[u - 1];  // still to climb
    const int rows_left = U - 1 - u;           // rows after this one
    const int min_step = std::max(0, need - rows_left * (S - 1));
    const int max_step = std::min(S - 1, need);
    std::uniform_int_distribution<int> d(min_step, max_step);
    b.lo[u] = b.lo[u - 1] + d(rng);
  }
  return b;
}

void AllValidBounds(int U, int T, int S, PruneBounds *cur, int u,
                    std::vector<PruneBounds> *out) {
  if (u == U) {
    if (cur->lo[U - 1] == T + 1 - S) out->push_back(*cur);
    return;
  }
  const int from = u == 0 ? 0 : cur->lo[u - 1];
  const int to = u == 0 ? 0 : std::min(T + 1 - S, cur->lo[u - 1] + S - 1);
  for (int x = from; x <= to; ++x) {
    cur->lo[u] = x;
    AllValidBounds(U, T, S, cur, u + 1, out);
  }
}

std::vector<PruneBounds> AllValidBounds(int U, int T, int S) {
  PruneBounds cur;
  cur.S = S;
  cur.lo.assign(U, 0);
  std::vector<PruneBounds> out;
  AllValidBounds(U, T, S, &cur, 0, &out);
  return out;
}

bool Holds(const PruneBounds &b, const AlignmentPath &p) {
  for (int u = 0; u < p.U; ++u)
    for (int t = 0; t <= p.T; ++t)
      if (p.Visited(u, t) && !b.Contains(u, t)) return false;
  return true;
}

bool Inside(const PruneBounds &inner, const PruneBounds &outer) {
  for (int u = 0; u < inner.U(); ++u)
    if (inner.lo[u] < outer.lo[u] || inner.lo[u] + inner.S > outer.lo[u] + outer.S) return false;
  return true;
}

int WidestRow(const AlignmentPath &p) {
  int widest = 0;
  for (int u = 0; u < p.U; ++u) {
    int n = 0;
    for (int t = 0; t <= p.T; ++t) n += p.Visited(u, t);
    widest = std::max(widest, n);
  }
  return widest;
}

// Brute force: some valid windows of width W (the widest path row) hold the
// path and also contain valid windows of the minimum feasible width.  When
// this holds a nested family can keep the path for every S >= W.
bool PathNestable(const AlignmentPath &p) {
  const int W = std::max(WidestRow(p), MinFeasibleS(p.U, p.T));
  if (W >= p.T + 1) return true;
  const auto small = AllValidBounds(p.U, p.T, std::min(MinFeasibleS(p.U, p.T), p.T + 1));
  for (const auto &outer : AllValidBounds(p.U, p.T, W)) {
    if (!Holds(outer, p)) continue;
    for (const auto &inner : small)
      if (Inside(inner, outer)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("single node lattice") {
  auto j = Uniform(1, 0, 2);
  CHECK(ForwardLoss(j, {}).log_z == doctest::Approx(std::log(1.0 / 3)).epsilon(1e-15));
}

TEST_CASE("uniform 2x2 lattice has probability 1/27") {
  auto j = Uniform(2, 2, 2);
  const std::vector<int> y{0, 1};
  const auto f = ForwardLoss(j, y);
  CHECK(std::abs(f.log_z - std::log(1.0 / 27)) < 1e-12);
  CHECK(std::abs(-f.log_z - 3.295836866004329) < 1e-12);
  std::uint64_t n = 0;
  EnumeratePaths(j, y, &n);
  CHECK(n == 3);
  auto occ = PosteriorOccupancy(j, y);
  CHECK(occ.Node(0, 1) == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("alpha boundary and termination") {
  std::mt19937_64 rng(10);
  auto j = RandomLattice(rng, 3, 4, 3);
  auto y = RandomTokens(rng, 4, 3);
  auto f = ForwardLoss(j, y);
  CHECK(f.Alpha(0, 0) == 0.0);
  CHECK(f.log_z == doctest::Approx(f.Alpha(2, 4) + j.Blank(2, 4)).epsilon(1e-15));
  CHECK(f.log_z <= 0.0);
}

TEST_CASE("forward agrees with enumeration on 300 random lattices") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> du(1, 4), dt(0, 4), dv(1, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int U = du(rng), T = dt(rng), V = dv(rng);
    auto j = RandomLattice(rng, U, T, V, 3.0);
    auto y = RandomTokens(rng, T, V);
    std::uint64_t n = 0;
    const double brute = EnumeratePaths(j, y, &n);
    worst = std::max(worst, std::abs(ForwardLoss(j, y).log_z - brute));
    CHECK(n == Binomial(U - 1 + T, T));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("single text position has exactly one path") {
  std::mt19937_64 rng(12);
  for (int T = 0; T < 8; ++T) {
    std::uint64_t n = 0;
    EnumeratePaths(RandomLattice(rng, 1, T, 2), RandomTokens(rng, T, 2), &n);
    CHECK(n == 1);
  }
}

TEST_CASE("input checks") {
  auto j = Uniform(2, 2, 2);
  CHECK_THROWS_AS(ForwardLoss(j, std::vector<int>{0, 2}), std::out_of_range);
  CHECK_THROWS_AS(ForwardLoss(j, std::vector<int>{0}), std::invalid_argument);
  CHECK_THROWS_AS(ForwardLoss(JointLogProbs::Zeros(0, 0, 2), {}), std::invalid_argument);
  auto big = Uniform(12, 13, 2);
  CHECK_THROWS_AS(EnumeratePaths(big, std::vector<int>(13, 0)), std::invalid_argument);
}

TEST_CASE("occupancy matches enumeration") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int U = 1 + trial % 4, T = trial % 5, V = 3;
    auto j = RandomLattice(rng, U, T, V);
    auto y = RandomTokens(rng, T, V);
    auto occ = PosteriorOccupancy(j, y);
    auto brute = EnumeratedOccupancy(j, y);
    double edge_mass = 0.0;
    for (std::size_t i = 0; i < brute.size(); ++i) {
      CHECK(occ.node[i] == doctest::Approx(brute[i]).epsilon(1e-9));
      CHECK(occ.node[i] >= -1e-15);
      CHECK(occ.node[i] <= 1 + 1e-12);
      edge_mass += occ.emit[i] + occ.blank[i];
    }
    CHECK(occ.Node(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(occ.Node(U - 1, T) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(edge_mass == doctest::Approx(U + T).epsilon(1e-12));
  }
}

TEST_CASE("lattice gradient matches finite differences") {
  std::mt19937_64 rng(14);
  for (auto [U, T, V] : std::vector<std::array<int, 3>>{{1, 0, 2}, {2, 2, 2}, {3, 4, 3}, {4, 3, 5}}) {
    Tensor logits = RandomTensor(rng, {static_cast<std::size_t>(U * (T + 1)),
                                       static_cast<std::size_t>(V + 1)});
    logits.set_requires_grad();
    auto y = RandomTokens(rng, T, V);
    auto nll = [&] {
      using namespace toktx::grad;
      auto lp = Reshape(LogSoftmax(logits), {static_cast<std::size_t>(U),
                                             static_cast<std::size_t>(T + 1),
                                             static_cast<std::size_t>(V + 1)});
      return Scale(TransducerLogLikelihood(lp, y), -1.0);
    };
    toktx::grad::Backward(nll());
    const std::vector<double> g(logits.grad().begin(), logits.grad().end());
    double worst = 0.0;
    for (std::size_t i = 0; i < logits.numel(); ++i) {
      NoGradGuard ng;
      worst = std::max(worst, RelErr(g[i], CentralDiff(logits, i, [&] { return nll().item(); })));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("gradient w.r.t. node log-probs is the edge posterior") {
  std::mt19937_64 rng(15);
  const int U = 3, T = 3, V = 2;
  auto j = RandomLattice(rng, U, T, V);
  auto y = RandomTokens(rng, T, V);
  Tensor lp({U, T + 1, V + 1}, j.logp);
  lp.set_requires_grad();
  toktx::grad::Backward(TransducerLogLikelihood(lp, y));
  auto occ = PosteriorOccupancy(j, y);
  for (int u = 0; u < U; ++u)
    for (int t = 0; t <= T; ++t) {
      const std::size_t base = (static_cast<std::size_t>(u) * (T + 1) + t) * (V + 1);
      const std::size_t node = static_cast<std::size_t>(u) * (T + 1) + t;
      double sum = 0.0;
      for (int v = 0; v <= V; ++v) sum += lp.grad()[base + v];
      CHECK(sum == doctest::Approx(occ.node[node]).epsilon(1e-12));
      CHECK(lp.grad()[base + V] == doctest::Approx(occ.blank[node]).epsilon(1e-12));
    }
}

TEST_CASE("re-normalized perturbations keep logZ non-positive") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    auto j = RandomLattice(rng, 1 + trial % 5, trial % 7, 4, 6.0);
    CHECK(j.MaxNormalizationError() < 1e-12);
    CHECK(ForwardLoss(j, RandomTokens(rng, j.T, 4)).log_z <= 0.0);
  }
}

TEST_CASE("viterbi equals enumeration argmax") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int U = 1 + trial % 4, T = trial % 5, V = 3;
    auto j = RandomLattice(rng, U, T, V, 3.0);
    auto y = RandomTokens(rng, T, V);
    double best = kNegInf;
    std::vector<int> best_steps;
    ForEachPath(j, y, [&](const std::vector<int> &steps, double lp) {
      if (lp > best) {
        best = lp;
        best_steps = steps;
      }
    });
    auto path = ViterbiAlign(j, y);
    std::string why;
    CHECK_MESSAGE(IsValidPath(path, y, &why), why);
    CHECK(path.log_prob == doctest::Approx(best).epsilon(1e-12));
    CHECK(path.steps == best_steps);
    CHECK(path.log_prob <= ForwardLoss(j, y).log_z + 1e-12);
  }
}

TEST_CASE("deterministic lattice yields its unique path") {
  // Path y0 y1 blank blank y2 blank over U = 3, T = 3.
  const std::vector<int> steps{0, 1, AlignmentPath::kBlank, AlignmentPath::kBlank, 1,
                               AlignmentPath::kBlank};
  const std::vector<int> y{0, 1, 1};
  auto j = JointLogProbs::Zeros(3, 3, 2);
  for (double &v : j.logp) v = kNegInf;
  int u = 0, t = 0;
  for (int s : steps) {
    if (s == AlignmentPath::kBlank) {
      j.At(u, t, 2) = 0.0;
      ++u;
    } else {
      j.At(u, t, s) = 0.0;
      ++t;
    }
  }
  for (int uu = 0; uu < 3; ++uu)  // nodes off the path: any normalized choice
    for (int tt = 0; tt <= 3; ++tt) {
      bool set = false;
      for (int v = 0; v <= 2; ++v) set |= j.At(uu, tt, v) == 0.0;
      if (!set) j.At(uu, tt, 0) = 0.0;
    }
  auto path = ViterbiAlign(j, y);
  CHECK(path.steps == steps);
  CHECK(path.log_prob == 0.0);
  CHECK(ForwardLoss(j, y).log_z == 0.0);
}

TEST_CASE("path validity checks") {
  const std::vector<int> y{1, 0};
  auto good = PathFromSteps(2, 2, {1, AlignmentPath::kBlank, 0, AlignmentPath::kBlank});
  CHECK(IsValidPath(good, y));
  CHECK(RemoveBlanks(good.steps) == y);
  auto short_path = PathFromSteps(2, 2, {1, AlignmentPath::kBlank, 0});
  CHECK_FALSE(IsValidPath(short_path, y));
  CHECK_THROWS(PathFromSteps(2, 2, {1, AlignmentPath::kBlank, AlignmentPath::kBlank, 0}));
  auto wrong = PathFromSteps(2, 2, {0, AlignmentPath::kBlank, 1, AlignmentPath::kBlank});
  CHECK_FALSE(IsValidPath(wrong, y));
  auto tampered = good;
  tampered.mask[1] = 0;
  CHECK_FALSE(IsValidPath(tampered, y));
  CHECK_THROWS(PathFromSteps(1, 1, {AlignmentPath::kBlank, AlignmentPath::kBlank, 0}));
}

TEST_CASE("bounds validation") {
  PruneBounds b;
  b.S = 3;
  b.lo = {0, 2, 3};
  CHECK_NOTHROW(b.Validate(5));
  b.lo = {0, 3, 3};
  CHECK_THROWS_AS(b.Validate(5), std::invalid_argument);  // step of S breaks reachability
  b.lo = {0, 2, 2};
  CHECK_THROWS_AS(b.Validate(5), std::invalid_argument);
  b.lo = {1, 2, 3};
  CHECK_THROWS_AS(b.Validate(5), std::invalid_argument);
  b.lo = {0, 3, 2};
  CHECK_THROWS_AS(b.Validate(4), std::invalid_argument);
  CHECK_NOTHROW(PruneBounds::Full(3, 5).Validate(5));
}

TEST_CASE("full-width pruning equals the exact lattice") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 50; ++trial) {
    const int U = 1 + trial % 5, T = trial % 7, V = 3;
    auto j = RandomLattice(rng, U, T, V);
    auto y = RandomTokens(rng, T, V);
    auto p = PrunedLogProbs::FromDense(j, PruneBounds::Full(U, T));
    CHECK(std::abs(PrunedForward(p, y).log_z - ForwardLoss(j, y).log_z) < 1e-9);
  }
}

TEST_CASE("pruned NLL is never below the exact NLL") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const int U = 2 + trial % 5, T = 2 + trial % 9, V = 3;
    auto j = RandomLattice(rng, U, T, V);
    auto y = RandomTokens(rng, T, V);
    const int S = std::uniform_int_distribution<int>(MinFeasibleS(U, T), T + 1)(rng);
    auto b = RandomBounds(rng, U, T, S);
    REQUIRE_NOTHROW(b.Validate(T));
    const double pruned = -PrunedForward(PrunedLogProbs::FromDense(j, b), y).log_z;
    CHECK(pruned >= -ForwardLoss(j, y).log_z - 1e-12);
  }
}

TEST_CASE("pruned forward equals the dense forward on the kept region") {
  // Oracle: dense lattice with every excluded node's outgoing arcs removed.
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    const int U = 2 + trial % 4, T = 3 + trial % 6, V = 2;
    auto j = RandomLattice(rng, U, T, V);
    auto y = RandomTokens(rng, T, V);
    auto b = RandomBounds(rng, U, T, MinFeasibleS(U, T) + trial % 2);
    auto masked = j;
    for (int u = 0; u < U; ++u)
      for (int t = 0; t <= T; ++t)
        if (!b.Contains(u, t))
          for (int v = 0; v <= V; ++v) masked.At(u, t, v) = kNegInf;
    double brute = kNegInf;
    ForEachPath(masked, y, [&](const std::vector<int> &, double lp) { brute = LogAdd(brute, lp); });
    auto f = PrunedForward(PrunedLogProbs::FromDense(j, b), y);
    CHECK(f.log_z == doctest::Approx(brute).epsilon(1e-9));
  }
}

TEST_CASE("pruned loss gradient matches finite differences") {
  std::mt19937_64 rng(21);
  const int U = 3, T = 5, V = 3;
  auto y = RandomTokens(rng, T, V);
  auto b = RandomBounds(rng, U, T, 3);
  Tensor logits = RandomTensor(rng, {U * 3, V + 1}).set_requires_grad();
  auto nll = [&] {
    using namespace toktx::grad;
    auto lp = Reshape(LogSoftmax(logits), {U, 3, V + 1});
    return Scale(PrunedLogLikelihood(lp, b, T, y), -1.0);
  };
  toktx::grad::Backward(nll());
  const std::vector<double> g(logits.grad().begin(), logits.grad().end());
  double worst = 0.0;
  for (std::size_t i = 0; i < logits.numel(); ++i) {
    NoGradGuard ng;
    worst = std::max(worst, RelErr(g[i], CentralDiff(logits, i, [&] { return nll().item(); })));
  }
  CHECK(worst < 1e-4);
  CHECK_THROWS_AS(PrunedLogLikelihood(Tensor({U, 4, V + 1}), b, T, y), toktx::grad::ShapeError);
}

TEST_CASE("bounds from occupancy") {
  std::mt19937_64 rng(22);
  SUBCASE("width beyond the lattice collapses to full coverage") {
    auto j = RandomLattice(rng, 3, 4, 3);
    auto y = RandomTokens(rng, 4, 3);
    for (int S : {5, 6, 40}) {
      auto b = BoundsFromOccupancy(PosteriorOccupancy(j, y), nullptr, S);
      CHECK(b.S == 5);
      CHECK(b.lo == std::vector<int>{0, 0, 0});
      CHECK(b.adjusted == (S > 5));
    }
  }
  SUBCASE("infeasible width is raised and flagged") {
    auto j = RandomLattice(rng, 2, 9, 3);
    auto b = BoundsFromOccupancy(PosteriorOccupancy(j, RandomTokens(rng, 9, 3)), nullptr, 2);
    CHECK(b.adjusted);
    CHECK(b.S == MinFeasibleS(2, 9));
    CHECK_NOTHROW(b.Validate(9));
  }
  SUBCASE("bounds are valid, nested across S and hold the viterbi path") {
    int nestable = 0, held = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const int U = 1 + trial % 6, T = trial % 10, V = 3;
      auto j = RandomLattice(rng, U, T, V, 1.0 + trial % 4);
      auto y = RandomTokens(rng, T, V);
      auto best = ViterbiAlign(j, y);
      const bool ok = PathNestable(best);
      nestable += ok;
      PruneBounds prev;
      for (int S = T + 2; S >= 2; --S) {
        auto b = BoundsFromOccupancy(PosteriorOccupancy(j, y), &best, S);
        REQUIRE_NOTHROW(b.Validate(T));
        if (S <= T + 1 && !prev.lo.empty()) CHECK(Inside(b, prev));
        if (ok && b.S >= WidestRow(best)) {
          CHECK(Holds(b, best));
          ++held;
        }
        prev = b;
      }
    }
    CHECK(nestable > 200);
    CHECK(held > 1000);
  }
}

TEST_CASE("simple lattice loss and bounds") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    const int U = 1 + trial % 6, T = trial % 11, V = 4;
    Tensor enc = RandomTensor(rng, {static_cast<std::size_t>(U), V + 1});
    Tensor pred = RandomTensor(rng, {static_cast<std::size_t>(T + 1), V + 1});
    auto y = RandomTokens(rng, T, V);
    for (int S : {2, 3, 4, T + 1, T + 3}) {
      if (S < 2) continue;
      auto r = SimpleLossAndBounds(enc, pred, y, S);
      CHECK(std::isfinite(r.loss.item()));
      CHECK(r.loss.item() >= 0.0);
      REQUIRE_NOTHROW(r.bounds.Validate(T));
      if (S >= T + 1) CHECK(r.bounds.lo == std::vector<int>(U, 0));
      // The reference Viterbi path comes from an independent dense lattice.
      auto j = JointLogProbs::Zeros(U, T, V);
      for (int u = 0; u < U; ++u)
        for (int t = 0; t <= T; ++t) {
          double z = kNegInf;
          for (int v = 0; v <= V; ++v) z = LogAdd(z, enc.at(u, v) + pred.at(t, v));
          for (int v = 0; v <= V; ++v) j.At(u, t, v) = enc.at(u, v) + pred.at(t, v) - z;
        }
      CHECK(r.loss.item() == doctest::Approx(-ForwardLoss(j, y).log_z).epsilon(1e-12));
      auto best = ViterbiAlign(j, y);
      CHECK(r.best.steps == best.steps);
      if (PathNestable(best) && r.bounds.S >= WidestRow(best)) CHECK(Holds(r.bounds, best));
    }
  }
  CHECK_THROWS_AS(SimpleLossAndBounds(Tensor({2, 3}), Tensor({3, 3}), std::vector<int>{0, 1}, 1),
                  std::invalid_argument);
}

TEST_CASE("simple loss gradient matches finite differences") {
  std::mt19937_64 rng(24);
  const int U = 3, T = 4, V = 3;
  Tensor enc = RandomTensor(rng, {U, V + 1}).set_requires_grad();
  Tensor pred = RandomTensor(rng, {T + 1, V + 1}).set_requires_grad();
  auto y = RandomTokens(rng, T, V);
  auto f = [&] { return SimpleLossAndBounds(enc, pred, y, 3).loss; };
  toktx::grad::Backward(f());
  for (Tensor *x : {&enc, &pred}) {
    const std::vector<double> g(x->grad().begin(), x->grad().end());
    for (std::size_t i = 0; i < x->numel(); ++i) {
      NoGradGuard ng;
      CHECK(RelErr(g[i], CentralDiff(*x, i, [&] { return f().item(); })) < 1e-4);
    }
  }
}

TEST_CASE("NLL gap does not grow along the S sweep") {
  std::mt19937_64 rng(25);
  int violations = 0, sweeps = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int U = 2 + trial % 6, T = 3 + trial % 14, V = 3;
    auto j = RandomLattice(rng, U, T, V, 2.5);
    auto y = RandomTokens(rng, T, V);
    const double exact = -ForwardLoss(j, y).log_z;
    auto occ = PosteriorOccupancy(j, y);
    auto best = ViterbiAlign(j, y);
    double prev = std::numeric_limits<double>::infinity();
    ++sweeps;
    for (int S = 2; S <= T + 1; ++S) {
      auto b = BoundsFromOccupancy(occ, &best, S);
      const double gap = -PrunedForward(PrunedLogProbs::FromDense(j, b), y).log_z - exact;
      CHECK(gap >= -1e-12);
      if (gap > prev + 1e-12) ++violations;
      prev = gap;
    }
    CHECK(std::abs(prev) < 1e-9);
  }
  CHECK(sweeps == 200);
  CHECK(violations == 0);
}

TEST_CASE("csv and pgm dumps") {
  const std::vector<double> m{0.0, -1.0, kNegInf, 2.0, 0.5, 1.0};
  const auto csv = MatrixCsv(m, 2, 3);
  std::istringstream is(csv);
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 2);
  }
  CHECK(rows == 2);
  CHECK(csv.find("-inf") != std::string::npos);

  const auto pgm = MatrixPgm(m, 2, 3);
  std::istringstream ps(pgm);
  std::string magic, comment, dims, maxval;
  std::getline(ps, magic);
  std::getline(ps, comment);
  std::getline(ps, dims);
  std::getline(ps, maxval);
  CHECK(magic == "P5");
  CHECK(comment == "# min=-1 max=2");
  CHECK(dims == "3 2");
  CHECK(maxval == "255");
  std::string pixels((std::istreambuf_iterator<char>(ps)), std::istreambuf_iterator<char>());
  REQUIRE(pixels.size() == 6);
  CHECK(static_cast<unsigned char>(pixels[1]) == 0);
  CHECK(static_cast<unsigned char>(pixels[2]) == 0);
  CHECK(static_cast<unsigned char>(pixels[3]) == 255);
  CHECK_THROWS(MatrixCsv(m, 4, 2));
}
