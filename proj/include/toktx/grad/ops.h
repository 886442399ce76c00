// include/toktx/grad/ops.h
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

#ifndef TOKTX_GRAD_OPS_H_
#define TOKTX_GRAD_OPS_H_

#include <span>
#include <vector>

#include "toktx/grad/tensor.h"

// Differentiable ops over Tensor.  Every op checks operand shapes and throws
// ShapeError on mismatch; the output is recorded for backward whenever grad
// mode is on and some input requires grad.
//
// Broadcasting is limited to leading-dimension expansion: in the binary
// elementwise ops, the second operand may have a shape equal to a suffix of
// the first operand's shape (e.g. [N, D] with [D]).
namespace toktx::grad {

Tensor Add(const Tensor &a, const Tensor &b);
Tensor Sub(const Tensor &a, const Tensor &b);
Tensor Mul(const Tensor &a, const Tensor &b);
Tensor Scale(const Tensor &a, double c);
Tensor AddScalar(const Tensor &a, double c);

// [n, k] x [k, m] -> [n, m]
Tensor MatMul(const Tensor &a, const Tensor &b);
// [n, m] -> [m, n]
Tensor Transpose(const Tensor &a);

Tensor Tanh(const Tensor &a);
Tensor Sigmoid(const Tensor &a);
Tensor Relu(const Tensor &a);
Tensor Exp(const Tensor &a);

// Over the last dimension.  LogSoftmax subtracts the row max first.
Tensor LogSoftmax(const Tensor &a);
Tensor Softmax(const Tensor &a);
// Normalizes each row to zero mean and unit variance (no affine part).
Tensor LayerNorm(const Tensor &a, double eps = 1e-5);

// Rows of `table` ([n, d]) selected by `ids`; -> [ids.size(), d].
Tensor Gather(const Tensor &table, std::span<const int> ids);
// Concatenation of 2-D tensors along rows (axis 0) or columns (axis 1).
Tensor Concat(const std::vector<Tensor> &parts, int axis);
// Half-open range [begin, end) of a 2-D tensor along `axis`.
Tensor Slice(const Tensor &a, int axis, std::size_t begin, std::size_t end);
Tensor Reshape(const Tensor &a, Shape shape);

// -> scalar
Tensor Sum(const Tensor &a);
Tensor Mean(const Tensor &a);
Tensor LogSumExp(const Tensor &a);
// [n, d] -> [d]
Tensor MeanRows(const Tensor &a);

}  // namespace toktx::grad

#endif  // TOKTX_GRAD_OPS_H_
