// include/toktx/grad/checkpoint.h
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

#ifndef TOKTX_GRAD_CHECKPOINT_H_
#define TOKTX_GRAD_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "toktx/grad/tensor.h"

namespace toktx::grad {

// Binary tensor container:
//   magic "TOKTXTNS" (8 bytes), format version (u32), tensor count (u32),
//   then per tensor: name length (u32), name bytes, rank (u32),
//   dims (u64 each), raw doubles.
// All integers and doubles are little-endian.
inline constexpr char kCheckpointMagic[8] = {'T', 'O', 'K', 'T', 'X', 'T', 'N', 'S'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void SaveTensors(const std::string &path, const NamedTensors &tensors);
NamedTensors LoadTensors(const std::string &path);

// Lookup helpers for loaded containers; throw std::runtime_error if absent.
const Tensor &FindTensor(const NamedTensors &tensors, const std::string &name);
bool HasTensor(const NamedTensors &tensors, const std::string &name);

}  // namespace toktx::grad

#endif  // TOKTX_GRAD_CHECKPOINT_H_
