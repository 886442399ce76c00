// src/grad/checkpoint.cc
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

#include "toktx/grad/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace toktx::grad {

namespace {

template <typename T>
T ToLittle(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void Put(std::ostream &os, T v) {
  v = ToLittle(v);
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
T Get(std::istream &is, const std::string &path) {
  T v;
  if (!is.read(reinterpret_cast<char *>(&v), sizeof(T)))
    throw std::runtime_error("truncated tensor file: " + path);
  return ToLittle(v);
}

}  // namespace

void SaveTensors(const std::string &path, const NamedTensors &tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  Put<std::uint32_t>(os, kCheckpointVersion);
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto &[name, t] : tensors) {
    Put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    Put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) Put<std::uint64_t>(os, d);
    for (double x : t.data()) Put<double>(os, x);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

NamedTensors LoadTensors(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open tensor file: " + path);
  char magic[sizeof(kCheckpointMagic)];
  if (!is.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw std::runtime_error("not a tensor file (bad magic): " + path);
  const auto version = Get<std::uint32_t>(is, path);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported tensor file version " + std::to_string(version) +
                             ": " + path);
  const auto count = Get<std::uint32_t>(is, path);
  NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = Get<std::uint32_t>(is, path);
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw std::runtime_error("truncated tensor file: " + path);
    const auto rank = Get<std::uint32_t>(is, path);
    Shape shape(rank);
    for (auto &d : shape) d = static_cast<std::size_t>(Get<std::uint64_t>(is, path));
    std::vector<double> values(NumElements(shape));
    for (double &x : values) x = Get<double>(is, path);
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return out;
}

const Tensor &FindTensor(const NamedTensors &tensors, const std::string &name) {
  for (const auto &[n, t] : tensors)
    if (n == name) return t;
  throw std::runtime_error("tensor not found: " + name);
}

bool HasTensor(const NamedTensors &tensors, const std::string &name) {
  for (const auto &[n, t] : tensors)
    if (n == name) return true;
  return false;
}

}  // namespace toktx::grad
