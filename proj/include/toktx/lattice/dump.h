// include/toktx/lattice/dump.h
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

#ifndef TOKTX_LATTICE_DUMP_H_
#define TOKTX_LATTICE_DUMP_H_

#include <span>
#include <string>

namespace toktx::lattice {

// Row-major matrix as CSV, one line per row.  -inf is written as "-inf".
std::string MatrixCsv(std::span<const double> values, int rows, int cols);

// 8-bit binary PGM (P5) heatmap, linear between the finite min and max;
// non-finite cells map to 0.  The header carries "# min=<v> max=<v>".
std::string MatrixPgm(std::span<const double> values, int rows, int cols);

// Writes `contents` to `path`, throwing std::runtime_error on failure.
void WriteFile(const std::string &path, const std::string &contents);

}  // namespace toktx::lattice

#endif  // TOKTX_LATTICE_DUMP_H_
