// src/lattice/dump.cc
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

#include "toktx/lattice/dump.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace toktx::lattice {

namespace {

void CheckSize(std::span<const double> values, int rows, int cols) {
  if (rows < 0 || cols < 0 || values.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("matrix dump: " + std::to_string(values.size()) +
                                " values do not fill " + std::to_string(rows) + "x" +
                                std::to_string(cols));
}

}  // namespace

std::string MatrixCsv(std::span<const double> values, int rows, int cols) {
  CheckSize(values, rows, cols);
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) os << ',';
      const double v = values[static_cast<std::size_t>(r) * cols + c];
      if (std::isinf(v))
        os << (v < 0 ? "-inf" : "inf");
      else
        os << v;
    }
    os << '\n';
  }
  return os.str();
}

std::string MatrixPgm(std::span<const double> values, int rows, int cols) {
  CheckSize(values, rows, cols);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (lo > hi) lo = hi = 0.0;
  std::ostringstream os;
  os.precision(9);
  os << "P5\n# min=" << lo << " max=" << hi << '\n' << cols << ' ' << rows << "\n255\n";
  const double range = hi - lo;
  for (double v : values) {
    unsigned char px = 0;
    if (std::isfinite(v))
      px = range > 0 ? static_cast<unsigned char>(std::lround(255.0 * (v - lo) / range)) : 255;
    os.put(static_cast<char>(px));
  }
  return os.str();
}

void WriteFile(const std::string &path, const std::string &contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace toktx::lattice
