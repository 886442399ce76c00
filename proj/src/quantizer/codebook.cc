// src/quantizer/codebook.cc
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

#include "toktx/quantizer/codebook.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "toktx/grad/checkpoint.h"

namespace toktx::quantizer {

FrameMatrix FrameMatrix::Slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows) throw std::out_of_range("frame slice out of range");
  FrameMatrix out(end - begin, dim);
  std::copy(data.begin() + begin * dim, data.begin() + end * dim, out.data.begin());
  return out;
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits.
double Uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void CheckDim(std::size_t got, const Codebook &cb) {
  if (got != cb.dim())
    throw std::invalid_argument("frame dimension " + std::to_string(got) +
                                " does not match codebook dimension " + std::to_string(cb.dim()));
}

std::size_t SampleByWeight(std::span<const double> w, double total, std::mt19937_64 &rng) {
  double r = Uniform01(rng) * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0 && r < w[i]) return i;
    r -= w[i];
  }
  return w.size() - 1;
}

// Greedy k-means++: each new centre is the best of several D^2-weighted
// candidates, judged by the resulting potential.
FrameMatrix SeedPlusPlus(const FrameMatrix &frames, int k, std::mt19937_64 &rng) {
  const std::size_t n = frames.rows;
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  FrameMatrix c(k, frames.dim);
  const auto first = static_cast<std::size_t>(Uniform01(rng) * n);
  std::copy_n(frames.Row(first).begin(), frames.dim, c.Row(0).begin());
  std::vector<double> d2(n), cand(n), best_d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = SquaredDistance(frames.Row(i), c.Row(0));
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(Uniform01(rng) * n);
      best_d2 = d2;
    } else {
      double best_pot = std::numeric_limits<double>::infinity();
      for (int trial = 0; trial < trials; ++trial) {
        const std::size_t idx = SampleByWeight(d2, total, rng);
        double pot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          cand[i] = std::min(d2[i], SquaredDistance(frames.Row(i), frames.Row(idx)));
          pot += cand[i];
        }
        if (pot < best_pot) {
          best_pot = pot;
          pick = idx;
          best_d2.swap(cand);
        }
      }
    }
    std::copy_n(frames.Row(pick).begin(), frames.dim, c.Row(j).begin());
    d2.swap(best_d2);
  }
  return c;
}

}  // namespace

int NearestCentroid(std::span<const double> frame, const Codebook &cb) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < cb.k(); ++j) {
    const double d = SquaredDistance(frame, cb.centroids.Row(j));
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

namespace {

Codebook LloydRun(const FrameMatrix &frames, int k, int iters, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Codebook cb;
  cb.centroids = SeedPlusPlus(frames, k, rng);

  const std::size_t n = frames.rows, dim = frames.dim;
  std::vector<int> assign(n, -1);
  std::vector<double> dist(n);
  for (int it = 0; it < std::max(iters, 1); ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int j = NearestCentroid(frames.Row(i), cb);
      changed |= j != assign[i];
      assign[i] = j;
      dist[i] = SquaredDistance(frames.Row(i), cb.centroids.Row(j));
      inertia += dist[i];
    }
    cb.inertia.push_back(inertia);
    if (!changed || it + 1 == iters) break;

    FrameMatrix sum(k, dim);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = sum.Row(assign[i]);
      auto x = frames.Row(i);
      for (std::size_t d = 0; d < dim; ++d) row[d] += x[d];
      ++count[assign[i]];
    }
    for (int j = 0; j < k; ++j) {
      auto c = cb.centroids.Row(j);
      if (count[j] > 0) {
        for (std::size_t d = 0; d < dim; ++d) c[d] = sum.Row(j)[d] / count[j];
        continue;
      }
      const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
      std::copy_n(frames.Row(far).begin(), dim, c.begin());
      dist[far] = 0.0;
    }
  }
  return cb;
}

}  // namespace

Codebook KMeansFit(const FrameMatrix &frames, int k, int iters, std::uint64_t seed, int restarts) {
  if (k < 1) throw std::invalid_argument("k-means needs k >= 1");
  if (frames.rows < static_cast<std::size_t>(k))
    throw std::invalid_argument("k-means needs at least k frames (have " +
                                std::to_string(frames.rows) + ", k = " + std::to_string(k) + ")");
  Codebook best = LloydRun(frames, k, iters, seed);
  for (int r = 1; r < restarts; ++r) {
    Codebook cb = LloydRun(frames, k, iters, seed + r);
    if (cb.inertia.back() < best.inertia.back()) best = std::move(cb);
  }
  return best;
}

std::vector<int> Tokenize(const FrameMatrix &frames, const Codebook &cb) {
  CheckDim(frames.dim, cb);
  std::vector<int> tokens(frames.rows);
  for (std::size_t i = 0; i < frames.rows; ++i) tokens[i] = NearestCentroid(frames.Row(i), cb);
  return tokens;
}

FrameMatrix Reconstruct(std::span<const int> tokens, const Codebook &cb) {
  FrameMatrix out(tokens.size(), cb.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || tokens[i] >= cb.k())
      throw std::out_of_range("token " + std::to_string(tokens[i]) + " outside codebook of size " +
                              std::to_string(cb.k()));
    std::copy_n(cb.centroids.Row(tokens[i]).begin(), cb.dim(), out.Row(i).begin());
  }
  return out;
}

double Inertia(const FrameMatrix &frames, const Codebook &cb) {
  CheckDim(frames.dim, cb);
  double s = 0.0;
  for (std::size_t i = 0; i < frames.rows; ++i)
    s += SquaredDistance(frames.Row(i), cb.centroids.Row(NearestCentroid(frames.Row(i), cb)));
  return s;
}

std::vector<int> MajorityLabels(const FrameMatrix &frames, std::span<const int> labels,
                                const Codebook &cb, int num_labels) {
  if (labels.size() != frames.rows) throw std::invalid_argument("one label per frame required");
  std::vector<std::vector<long>> votes(cb.k(), std::vector<long>(num_labels, 0));
  const auto tokens = Tokenize(frames, cb);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_labels) throw std::out_of_range("label out of range");
    ++votes[tokens[i]][labels[i]];
  }
  std::vector<int> out(cb.k(), -1);
  for (int j = 0; j < cb.k(); ++j) {
    long best = 0;
    for (int l = 0; l < num_labels; ++l)
      if (votes[j][l] > best) {
        best = votes[j][l];
        out[j] = l;
      }
  }
  return out;
}

void SaveCodebook(const std::string &path, const Codebook &cb) {
  using grad::Tensor;
  grad::NamedTensors t;
  t.emplace_back("centroids", Tensor({cb.centroids.rows, cb.centroids.dim}, cb.centroids.data));
  t.emplace_back("inertia", Tensor({cb.inertia.size()}, cb.inertia));
  if (!cb.label_map.empty())
    t.emplace_back("label_map", Tensor({cb.label_map.size()},
                                       std::vector<double>(cb.label_map.begin(), cb.label_map.end())));
  grad::SaveTensors(path, t);
}

Codebook LoadCodebook(const std::string &path) {
  const auto t = grad::LoadTensors(path);
  const auto &c = grad::FindTensor(t, "centroids");
  if (c.rank() != 2) throw std::runtime_error("codebook centroids must be 2-D: " + path);
  Codebook cb;
  cb.centroids = FrameMatrix(c.dim(0), c.dim(1));
  std::copy(c.data().begin(), c.data().end(), cb.centroids.data.begin());
  if (grad::HasTensor(t, "inertia")) {
    const auto &in = grad::FindTensor(t, "inertia");
    cb.inertia.assign(in.data().begin(), in.data().end());
  }
  if (grad::HasTensor(t, "label_map"))
    for (double v : grad::FindTensor(t, "label_map").data()) cb.label_map.push_back(static_cast<int>(v));
  return cb;
}

}  // namespace toktx::quantizer
