// include/toktx/grad/parameters.h
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

#ifndef TOKTX_GRAD_PARAMETERS_H_
#define TOKTX_GRAD_PARAMETERS_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "toktx/grad/tensor.h"

namespace toktx::grad {

// Ordered, named collection of learnable tensors.  Registration order is the
// checkpoint order.
class ParameterSet {
 public:
  // Registers `value` (grad enabled) under `name` and returns the handle.
  Tensor Add(const std::string &name, Tensor value);

  const std::vector<std::pair<std::string, Tensor>> &items() const { return items_; }
  std::vector<Tensor> tensors() const;
  const Tensor *Find(const std::string &name) const;
  std::size_t NumScalars() const;
  void ZeroGrad();

  // Copies values (not handles) from `other`; names and shapes must match.
  void CopyValuesFrom(const std::vector<std::pair<std::string, Tensor>> &other);

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace toktx::grad

#endif  // TOKTX_GRAD_PARAMETERS_H_
