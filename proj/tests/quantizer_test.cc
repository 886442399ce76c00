// tests/quantizer_test.cc
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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "toktx/quantizer/codebook.h"
#include "toktx/quantizer/synthetic_corpus.h"

using namespace toktx::quantizer;

namespace {

FrameMatrix FromRows(const std::vector<std::vector<double>> &rows) {
  FrameMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.Row(i).begin());
  return m;
}

// Minimum-SSE partition by trying every labelling of the rows into k groups
// (each group non-empty); returns the group means sorted lexicographically.
std::vector<std::vector<double>> ExhaustiveCentroids(const FrameMatrix &x, int k, double *best_sse) {
  const std::size_t n = x.rows, dim = x.dim;
  std::vector<int> label(n, 0);
  std::vector<std::vector<double>> best;
  *best_sse = INFINITY;
  long total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= k;
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (std::size_t i = 0; i < n; ++i, c /= k) label[i] = static_cast<int>(c % k);
    std::vector<std::vector<double>> mean(k, std::vector<double>(dim, 0.0));
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) mean[label[i]][d] += x.Row(i)[d];
      ++count[label[i]];
    }
    if (std::count(count.begin(), count.end(), 0) > 0) continue;
    for (int j = 0; j < k; ++j)
      for (double &v : mean[j]) v /= count[j];
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) sse += SquaredDistance(x.Row(i), mean[label[i]]);
    if (sse < *best_sse) {
      *best_sse = sse;
      best = mean;
    }
  }
  std::sort(best.begin(), best.end());
  return best;
}

std::vector<std::vector<double>> SortedCentroids(const Codebook &cb) {
  std::vector<std::vector<double>> out;
  for (int j = 0; j < cb.k(); ++j) out.emplace_back(cb.centroids.Row(j).begin(), cb.centroids.Row(j).end());
  std::sort(out.begin(), out.end());
  return out;
}

bool SameSet(const std::vector<std::vector<double>> &a, const std::vector<std::vector<double>> &b,
             double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t d = 0; d < a[i].size(); ++d)
      if (std::abs(a[i][d] - b[i][d]) > tol) return false;
  return true;
}

FrameMatrix Shuffled(const FrameMatrix &x, std::mt19937_64 &rng) {
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  FrameMatrix out(x.rows, x.dim);
  for (std::size_t i = 0; i < x.rows; ++i) std::copy_n(x.Row(order[i]).begin(), x.dim, out.Row(i).begin());
  return out;
}

}  // namespace

TEST_CASE("two points, two clusters") {
  auto x = FromRows({{1.0, 2.0}, {-3.0, 0.5}});
  auto cb = KMeansFit(x, 2, 10, 1);
  CHECK(SameSet(SortedCentroids(cb), {{-3.0, 0.5}, {1.0, 2.0}}, 0.0));
  CHECK(cb.inertia.back() == 0.0);
}

TEST_CASE("points on a line match exhaustive labelling") {
  auto x = FromRows({{0.0}, {1.0}, {10.0}, {11.0}});
  double sse = 0;
  auto oracle = ExhaustiveCentroids(x, 2, &sse);
  CHECK(SameSet(oracle, {{0.5}, {10.5}}, 1e-12));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto cb = KMeansFit(x, 2, 50, seed);
    CHECK(SameSet(SortedCentroids(cb), oracle, 1e-12));
    CHECK(cb.inertia.back() == doctest::Approx(sse).epsilon(1e-12));
  }
}

TEST_CASE("row order does not change the fitted centroid set") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + trial % 2;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 8; ++i) {
      const int c = i % k;
      rows.push_back({10.0 * c + noise(rng), -7.0 * c + noise(rng)});
    }
    auto x = FromRows(rows);
    double sse = 0;
    auto oracle = ExhaustiveCentroids(x, k, &sse);
    for (int shuffle = 0; shuffle < 3; ++shuffle) {
      auto cb = KMeansFit(Shuffled(x, rng), k, 100, 11);
      CHECK(SameSet(SortedCentroids(cb), oracle, 1e-9));
    }
  }
}

TEST_CASE("inertia never increases") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    FrameMatrix x(300, 3);
    for (double &v : x.data) v = u(rng);
    auto cb = KMeansFit(x, 8, 100, trial);
    REQUIRE(cb.inertia.size() >= 2);
    for (std::size_t i = 1; i < cb.inertia.size(); ++i) CHECK(cb.inertia[i] <= cb.inertia[i - 1]);
    CHECK(Inertia(x, cb) == doctest::Approx(cb.inertia.back()).epsilon(1e-12));
  }
}

TEST_CASE("fit is deterministic and validates its inputs") {
  FrameMatrix x(50, 2);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 1);
  for (double &v : x.data) v = n(rng);
  auto a = KMeansFit(x, 5, 20, 3), b = KMeansFit(x, 5, 20, 3);
  CHECK(a.centroids.data == b.centroids.data);
  CHECK_THROWS_AS(KMeansFit(x.Slice(0, 4), 5, 20, 3), std::invalid_argument);
  CHECK_THROWS_AS(KMeansFit(x, 0, 20, 3), std::invalid_argument);
}

TEST_CASE("empty clusters are re-seeded") {
  // Five copies of one point and one outlier: any empty cluster must move
  // onto the outlier, leaving zero inertia.
  auto x = FromRows({{0.0}, {0.0}, {0.0}, {0.0}, {0.0}, {5.0}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto cb = KMeansFit(x, 2, 10, seed);
    CHECK(cb.inertia.back() == 0.0);
  }
}

TEST_CASE("tokenize and reconstruct") {
  Codebook cb;
  cb.centroids = FromRows({{0, 0}, {1, 0}, {5, 5}, {0, 3}, {9, 9}, {2, 0}});
  for (int j = 0; j < cb.k(); ++j) CHECK(NearestCentroid(cb.centroids.Row(j), cb) == j);
  // Equidistant between centroids 2 and 5 ((5,5) and (2,0)): (3.5, 2.5)
  // lies on their bisector and is closer to them than to the others.
  const std::vector<double> mid{3.5, 2.5};
  REQUIRE(SquaredDistance(mid, cb.centroids.Row(2)) == SquaredDistance(mid, cb.centroids.Row(5)));
  CHECK(NearestCentroid(mid, cb) == 2);

  auto rec = Reconstruct(Tokenize(cb.centroids, cb), cb);
  CHECK(rec.data == cb.centroids.data);
  const std::vector<int> tokens{3, 3, 0, 5, 1};
  CHECK(Tokenize(Reconstruct(tokens, cb), cb) == tokens);
  CHECK(Reconstruct(std::vector<int>{}, cb).rows == 0);
  CHECK_THROWS_AS(Reconstruct(std::vector<int>{6}, cb), std::out_of_range);
  CHECK_THROWS_AS(Tokenize(FrameMatrix(2, 3), cb), std::invalid_argument);
}

TEST_CASE("noisy frames recover their centroid") {
  const Grammar g(16, 7, 3.0);
  const double sigma = g.MinGap() / 6.5;  // gap > 6 sigma
  Codebook cb;
  cb.centroids = g.centroids();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, sigma);
  std::uniform_int_distribution<int> pick(0, kNumUnits - 1);
  const int n = 10000;
  int correct = 0;
  double mse_rec = 0.0, mse_noise = 0.0;
  std::vector<double> frame(16);
  for (int i = 0; i < n; ++i) {
    const int j = pick(rng);
    for (std::size_t d = 0; d < 16; ++d) frame[d] = cb.centroids.Row(j)[d] + noise(rng);
    const int got = NearestCentroid(frame, cb);
    correct += got == j;
    mse_rec += SquaredDistance(frame, cb.centroids.Row(got));
    mse_noise += SquaredDistance(frame, cb.centroids.Row(j));
  }
  CHECK(static_cast<double>(correct) / n > 0.99);
  mse_rec /= n * 16.0;
  mse_noise /= n * 16.0;
  // Nearest-centroid error never exceeds the generating-centroid error, and
  // the latter estimates sigma^2 (relative sd of the estimate is 1/sqrt(80000)).
  CHECK(mse_rec <= mse_noise);
  CHECK(std::abs(mse_noise / (sigma * sigma) - 1.0) < 4.0 / std::sqrt(n * 16.0) * std::sqrt(2.0));
}

TEST_CASE("codebook file round trip") {
  FrameMatrix x(40, 3);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  for (double &v : x.data) v = n(rng);
  auto cb = KMeansFit(x, 4, 20, 1);
  cb.label_map = {3, 1, 0, 2};
  const auto path = (std::filesystem::temp_directory_path() / "toktx_codebook_test.bin").string();
  SaveCodebook(path, cb);
  auto back = LoadCodebook(path);
  std::filesystem::remove(path);
  CHECK(back.centroids.data == cb.centroids.data);
  CHECK(back.centroids.dim == 3);
  CHECK(back.inertia == cb.inertia);
  CHECK(back.label_map == cb.label_map);
}

TEST_CASE("grammar expansion") {
  int two = -1;
  for (int s = 0; s < kNumSymbols; ++s)
    if (Grammar::Expansion(s) == 2) two = s;
  REQUIRE(two >= 0);
  CHECK(Grammar::Expand(std::vector<int>{two}, 1.0).size() == 2);
  CHECK(Grammar::Expand(std::vector<int>{two}, 2.0).size() == 4);
  const std::vector<int> text{0, 5, 5, 2, 15};
  CHECK(Grammar::Invert(Grammar::Expand(text, 1.7)) == text);
  CHECK_THROWS_AS(Grammar::Expansion(16), std::out_of_range);
}

TEST_CASE("generated corpus") {
  const Grammar g;
  CorpusOptions opts;
  opts.n_utts = 300;
  opts.rates = {{0.6, 1.4}, {1.8, 2.9}};
  opts.seed = 12;
  auto a = GenerateCorpus(opts, g), b = GenerateCorpus(opts, g);
  REQUIRE(a.size() == 300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].frames.data == b[i].frames.data);
    CHECK(a[i].text == b[i].text);
    CHECK(a[i].rate == b[i].rate);
    const auto &u = a[i];
    CHECK(u.text.size() >= 3);
    CHECK(u.text.size() <= 8);
    CHECK(((u.rate >= 0.6 && u.rate <= 1.4) || (u.rate >= 1.8 && u.rate <= 2.9)));
    CHECK(u.frames.rows == u.gold_tokens.size());
    double expected = 0.0;
    for (int s : u.text) expected += u.rate * Grammar::Expansion(s);
    CHECK(std::abs(static_cast<double>(u.frames.rows) - expected) <= 0.5 * u.text.size() + 1e-9);
    CHECK(Grammar::Invert(u.gold_tokens) == u.text);
  }
  opts.rates = {{0.4, 1.0}};
  CHECK_THROWS_AS(GenerateCorpus(opts, g), std::invalid_argument);
  CHECK(RateBins(1.0, 0.15, 6)[1].lo == doctest::Approx(0.90));
}

TEST_CASE("k-means on a corpus recovers the generating units") {
  const Grammar g;
  CorpusOptions opts;
  opts.n_utts = 200;
  opts.rates = {{0.85, 1.15}, {1.85, 2.15}};
  opts.seed = 13;
  auto corpus = GenerateCorpus(opts, g);
  std::size_t n = 0;
  for (const auto &u : corpus) n += u.frames.rows;
  FrameMatrix all(n, g.feat_dim());
  std::vector<int> gold;
  std::size_t r = 0;
  for (const auto &u : corpus) {
    std::copy(u.frames.data.begin(), u.frames.data.end(), all.Row(r).begin());
    r += u.frames.rows;
    gold.insert(gold.end(), u.gold_tokens.begin(), u.gold_tokens.end());
  }
  auto cb = KMeansFit(all, kNumUnits, 100, 1, 8);
  auto map = MajorityLabels(all, gold, cb, kNumUnits);
  auto tokens = Tokenize(all, cb);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += map[tokens[i]] == gold[i];
  CHECK(static_cast<double>(correct) / n > 0.99);
  std::vector<int> sorted = map;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> ident(kNumUnits);
  std::iota(ident.begin(), ident.end(), 0);
  CHECK(sorted == ident);
}
