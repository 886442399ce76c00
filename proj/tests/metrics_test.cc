// tests/metrics_test.cc
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

#include <cmath>
#include <random>
#include <set>

#include "toktx/metrics/edit_ops.h"

using namespace toktx::metrics;

namespace {

// Edit distance by exhaustive search over edit scripts.  A script walks both
// sequences left to right and at each step keeps/substitutes, inserts or
// deletes one symbol; every script is enumerated, pruning only those that
// already cost at least as much as the best complete script found.
void SearchScripts(const std::vector<int> &a, const std::vector<int> &b, std::size_t i,
                   std::size_t j, int cost, int *best) {
  const long left = static_cast<long>(a.size() - i) - static_cast<long>(b.size() - j);
  if (cost + std::abs(left) >= *best) return;
  if (i == a.size() && j == b.size()) {
    *best = cost;
    return;
  }
  if (i < a.size() && j < b.size()) SearchScripts(a, b, i + 1, j + 1, cost + (a[i] != b[j]), best);
  if (j < b.size()) SearchScripts(a, b, i, j + 1, cost + 1, best);
  if (i < a.size()) SearchScripts(a, b, i + 1, j, cost + 1, best);
}

int BruteForceDistance(const std::vector<int> &a, const std::vector<int> &b) {
  int best = static_cast<int>(a.size() + b.size()) + 1;
  SearchScripts(a, b, 0, 0, 0, &best);
  return best;
}

std::vector<std::vector<int>> AllSequences(int max_len, int alphabet) {
  std::vector<std::vector<int>> all{{}};
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (static_cast<int>(all[k].size()) == max_len) continue;
    for (int v = 0; v < alphabet; ++v) {
      auto s = all[k];
      s.push_back(v);
      all.push_back(std::move(s));
    }
  }
  return all;
}

std::vector<int> Random(std::mt19937_64 &rng, int max_len, int alphabet, int min_len = 0) {
  std::uniform_int_distribution<int> dl(min_len, max_len), dv(0, alphabet - 1);
  std::vector<int> s(dl(rng));
  for (int &v : s) v = dv(rng);
  return s;
}

}  // namespace

TEST_CASE("identical sequences") {
  auto ops = WordOps("the cat sat", "the cat sat");
  CHECK(ops.Distance() == 0);
  CHECK(ops.Rate() == 0.0);
}

TEST_CASE("forced deletion") {
  auto ops = WordOps("a b c", "a c");
  CHECK(ops.del == 1);
  CHECK(ops.ins == 0);
  CHECK(ops.sub == 0);
  CHECK(ops.Distance() == 1);
}

TEST_CASE("character error rate") {
  CHECK(Cer("abc", "abc") == 0.0);
  CHECK(Cer("abc", "axc") == doctest::Approx(1.0 / 3));
  CHECK(CharOps("héllo", "hello").sub == 1);
  CHECK(Utf8CodePoints("h\xc3\xa9").size() == 2);
}

TEST_CASE("word normalization") {
  CHECK(NormalizeWords("Hello, World!  again.") == std::vector<std::string>{"hello", "world", "again"});
  CHECK(Wer("The end.", "the END") == 0.0);
}

TEST_CASE("empty reference rejected") {
  CHECK_THROWS_AS(LevenshteinOps(std::vector<int>{}, std::vector<int>{1}), std::invalid_argument);
  CHECK_THROWS_AS(Cer("", "x"), std::invalid_argument);
}

TEST_CASE("tie-break prefers substitution, then insertion") {
  // ab -> ba: two substitutions or one insertion plus one deletion.
  auto ops = LevenshteinOps(std::vector<int>{0, 1}, std::vector<int>{1, 0});
  CHECK(ops.sub == 2);
  CHECK(ops.ins == 0);
  // a -> ba: a single leading insertion.
  ops = LevenshteinOps(std::vector<int>{0}, std::vector<int>{1, 0});
  CHECK(ops.ins == 1);
  CHECK(ops.Distance() == 1);
}

TEST_CASE("distance matches brute-force edit scripts") {
  // Every pair up to length 5, then random pairs up to length 8.
  const auto all = AllSequences(5, 4);
  long checked = 0, mismatches = 0;
  for (const auto &a : all)
    for (const auto &b : all) {
      if (a.empty()) continue;
      mismatches += LevenshteinOps(a, b).Distance() != BruteForceDistance(a, b);
      ++checked;
    }
  CHECK(checked == 1364L * 1365L);
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 5000; ++trial) {
    auto a = Random(rng, 8, 4, 1), b = Random(rng, 8, 4);
    mismatches += LevenshteinOps(a, b).Distance() != BruteForceDistance(a, b);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("symmetry, decomposition and triangle inequality") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    auto a = Random(rng, 8, 4, 1), b = Random(rng, 8, 4, 1), c = Random(rng, 8, 4, 1);
    auto ab = LevenshteinOps(a, b), ba = LevenshteinOps(b, a);
    CHECK(ab.Distance() == ba.Distance());
    CHECK(ab.ins - ab.del == static_cast<long>(b.size()) - static_cast<long>(a.size()));
    CHECK(ab.Distance() <= LevenshteinOps(a, c).Distance() + LevenshteinOps(c, b).Distance());
    CHECK(ab.ins <= std::max<long>(a.size(), b.size()));
    CHECK(ab.del <= std::max<long>(a.size(), b.size()));
    CHECK(ab.sub <= std::max<long>(a.size(), b.size()));
    CHECK(ab.Distance() == ab.ins + ab.del + ab.sub);
    CHECK(ab.Rate() == doctest::Approx(ab.InsRate() + ab.DelRate() + ab.SubRate()).epsilon(1e-15));
  }
}

TEST_CASE("rate identity reconciles rounded table rows") {
  // Rates reported to two decimals: the sum of the rounded parts may differ
  // from the rounded total by at most the accumulated rounding (3 x 0.005).
  const double ins = 0.49, del = 0.69, sub = 2.10, total = 3.29;
  CHECK(std::abs(ins + del + sub - total) <= 0.02);
}

TEST_CASE("corpus aggregation") {
  EditOps total;
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"abcd", "abd"}, {"xy", "xyz"}, {"hello", "hallo"}};
  double weighted = 0.0;
  long chars = 0;
  for (const auto &[r, h] : pairs) {
    auto ops = CharOps(r, h);
    total += ops;
    weighted += ops.Rate() * ops.ref_len;
    chars += ops.ref_len;
  }
  CHECK(total.Rate() == doctest::Approx(weighted / chars).epsilon(1e-15));
  CHECK(total.ref_len == 11);
}

TEST_CASE("cosine similarity") {
  const std::vector<double> v{1, -2, 3}, neg{-1, 2, -3}, e1{1, 0, 0}, e2{0, 1, 0};
  CHECK(CosineSimilarity(v, v) == doctest::Approx(1.0));
  CHECK(CosineSimilarity(v, neg) == doctest::Approx(-1.0));
  CHECK(CosineSimilarity(e1, e2) == 0.0);
  CHECK_THROWS(CosineSimilarity(v, std::vector<double>{0, 0, 0}));
  CHECK_THROWS(CosineSimilarity(v, std::vector<double>{1, 0}));
}
