// src/metrics/edit_ops.cc
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

#include "toktx/metrics/edit_ops.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

namespace toktx::metrics {

EditOps &EditOps::operator+=(const EditOps &o) {
  ins += o.ins;
  del += o.del;
  sub += o.sub;
  ref_len += o.ref_len;
  hyp_len += o.hyp_len;
  return *this;
}

EditOps LevenshteinOps(std::span<const int> ref, std::span<const int> hyp) {
  if (ref.empty()) throw std::invalid_argument("levenshtein: empty reference");
  const std::size_t n = ref.size(), m = hyp.size(), w = m + 1;
  std::vector<long> d((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<long>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    d[i * w] = static_cast<long>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const long diag = d[(i - 1) * w + j - 1] + (ref[i - 1] != hyp[j - 1]);
      d[i * w + j] = std::min({diag, d[i * w + j - 1] + 1, d[(i - 1) * w + j] + 1});
    }
  }
  EditOps ops;
  ops.ref_len = static_cast<long>(n);
  ops.hyp_len = static_cast<long>(m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const long here = d[i * w + j];
    if (i > 0 && j > 0 && here == d[(i - 1) * w + j - 1] + (ref[i - 1] != hyp[j - 1])) {
      ops.sub += ref[i - 1] != hyp[j - 1];
      --i;
      --j;
    } else if (j > 0 && here == d[i * w + j - 1] + 1) {
      ++ops.ins;
      --j;
    } else {
      ++ops.del;
      --i;
    }
  }
  return ops;
}

EditOps LevenshteinOps(std::span<const std::string> ref, std::span<const std::string> hyp) {
  std::map<std::string, int, std::less<>> ids;
  auto intern = [&ids](std::span<const std::string> words) {
    std::vector<int> out;
    out.reserve(words.size());
    for (const auto &w : words) out.push_back(ids.emplace(w, static_cast<int>(ids.size())).first->second);
    return out;
  };
  const auto r = intern(ref);
  const auto h = intern(hyp);
  return LevenshteinOps(std::span<const int>(r), std::span<const int>(h));
}

std::vector<int> Utf8CodePoints(std::string_view text) {
  constexpr int kReplacement = 0xFFFD;
  std::vector<int> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > text.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    int cp = len == 1 ? c : c & (0xFF >> (len + 1));
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc >> 6) != 0x2) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(ok ? cp : kReplacement);
    i += ok ? len : 1;
  }
  return out;
}

std::vector<std::string> NormalizeWords(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && std::ispunct(static_cast<unsigned char>(cur.back()))) cur.pop_back();
    if (!cur.empty()) words.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c))
      flush();
    else
      cur.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  return words;
}

EditOps CharOps(std::string_view ref, std::string_view hyp) {
  const auto r = Utf8CodePoints(ref), h = Utf8CodePoints(hyp);
  return LevenshteinOps(std::span<const int>(r), std::span<const int>(h));
}

EditOps WordOps(std::string_view ref, std::string_view hyp) {
  const auto r = NormalizeWords(ref), h = NormalizeWords(hyp);
  return LevenshteinOps(std::span<const std::string>(r), std::span<const std::string>(h));
}

double Cer(std::string_view ref, std::string_view hyp) { return CharOps(ref, hyp).Rate(); }
double Wer(std::string_view ref, std::string_view hyp) { return WordOps(ref, hyp).Rate(); }

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: lengths " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()) + " differ");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) throw std::invalid_argument("cosine_similarity: zero vector");
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace toktx::metrics
