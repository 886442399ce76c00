// include/toktx/metrics/edit_ops.h
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

#ifndef TOKTX_METRICS_EDIT_OPS_H_
#define TOKTX_METRICS_EDIT_OPS_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace toktx::metrics {

// Levenshtein decomposition.  `ins` counts hypothesis symbols with no
// reference counterpart, `del` reference symbols missing from the hypothesis.
struct EditOps {
  long ins = 0;
  long del = 0;
  long sub = 0;
  long ref_len = 0;
  long hyp_len = 0;

  long Distance() const { return ins + del + sub; }
  double InsRate() const { return static_cast<double>(ins) / ref_len; }
  double DelRate() const { return static_cast<double>(del) / ref_len; }
  double SubRate() const { return static_cast<double>(sub) / ref_len; }
  // Error rate: Distance() / ref_len.
  double Rate() const { return static_cast<double>(Distance()) / ref_len; }

  // Corpus aggregation: counts and lengths add.
  EditOps &operator+=(const EditOps &o);
};

// Unit-cost edit distance with backtrace.  Among equal-cost alignments the
// backtrace prefers substitution (or match), then insertion, then deletion.
// Throws std::invalid_argument on an empty reference.
EditOps LevenshteinOps(std::span<const int> ref, std::span<const int> hyp);
EditOps LevenshteinOps(std::span<const std::string> ref, std::span<const std::string> hyp);

// Unicode code points of a UTF-8 string; malformed bytes map to U+FFFD.
std::vector<int> Utf8CodePoints(std::string_view text);

// Lowercases (ASCII), strips trailing punctuation from each word and splits
// on whitespace.
std::vector<std::string> NormalizeWords(std::string_view text);

EditOps CharOps(std::string_view ref, std::string_view hyp);
EditOps WordOps(std::string_view ref, std::string_view hyp);
double Cer(std::string_view ref, std::string_view hyp);
double Wer(std::string_view ref, std::string_view hyp);

// dot(a, b) / (|a| |b|).  Throws on a zero vector or a length mismatch.
double CosineSimilarity(std::span<const double> a, std::span<const double> b);

}  // namespace toktx::metrics

#endif  // TOKTX_METRICS_EDIT_OPS_H_
