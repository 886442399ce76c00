// include/toktx/quantizer/codebook.h
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

#ifndef TOKTX_QUANTIZER_CODEBOOK_H_
#define TOKTX_QUANTIZER_CODEBOOK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace toktx::quantizer {

// Row-major [rows, dim] block of embedding frames.
struct FrameMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  FrameMatrix() = default;
  FrameMatrix(std::size_t r, std::size_t d) : rows(r), dim(d), data(r * d, 0.0) {}

  std::span<const double> Row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  std::span<double> Row(std::size_t i) { return {data.data() + i * dim, dim}; }
  // Rows [begin, end) as a new matrix.
  FrameMatrix Slice(std::size_t begin, std::size_t end) const;
};

double SquaredDistance(std::span<const double> a, std::span<const double> b);

struct Codebook {
  FrameMatrix centroids;        // [k, dim]
  std::vector<double> inertia;  // sum of squared distances after each assignment pass
  // Optional map from centroid index to a reference labelling (e.g. the
  // generating unit of synthetic data); empty when unknown.
  std::vector<int> label_map;

  int k() const { return static_cast<int>(centroids.rows); }
  std::size_t dim() const { return centroids.dim; }
};

// Lloyd iterations from greedy k-means++ seeding.  A cluster left empty by an
// assignment pass is re-seeded at the point farthest from its centroid.
// Stops early once assignments no longer change.  With restarts > 1 the
// run with the lowest final inertia is kept (seeds seed, seed+1, ...).
// Throws std::invalid_argument when frames.rows < k or k < 1.
Codebook KMeansFit(const FrameMatrix &frames, int k, int iters, std::uint64_t seed,
                   int restarts = 1);

// Nearest centroid under squared Euclidean distance, ties to the lower index.
int NearestCentroid(std::span<const double> frame, const Codebook &cb);
std::vector<int> Tokenize(const FrameMatrix &frames, const Codebook &cb);
// Row i is the centroid of tokens[i].  Throws std::out_of_range on a bad token.
FrameMatrix Reconstruct(std::span<const int> tokens, const Codebook &cb);

// Sum of squared distances from each frame to its nearest centroid.
double Inertia(const FrameMatrix &frames, const Codebook &cb);

// For each centroid, the most frequent label among frames assigned to it
// (ties to the lower label; -1 for a centroid with no frames).
std::vector<int> MajorityLabels(const FrameMatrix &frames, std::span<const int> labels,
                                const Codebook &cb, int num_labels);

// Stored in the checkpoint tensor container.
void SaveCodebook(const std::string &path, const Codebook &cb);
Codebook LoadCodebook(const std::string &path);

}  // namespace toktx::quantizer

#endif  // TOKTX_QUANTIZER_CODEBOOK_H_
