// include/toktx/grad/tensor.h
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

#ifndef TOKTX_GRAD_TENSOR_H_
#define TOKTX_GRAD_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toktx::grad {

using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape &shape);
std::size_t NumElements(const Shape &shape);

// Thrown by every op whose operand shapes are incompatible.  The message
// names the op and both shapes.
class ShapeError : public std::invalid_argument {
 public:
  ShapeError(std::string_view op, const Shape &a, const Shape &b);
  explicit ShapeError(const std::string &msg) : std::invalid_argument(msg) {}
};

struct TensorImpl;

// One recorded operation.  `backward` reads out.grad and accumulates into the
// grad buffers of those inputs that require grad.
struct Node {
  std::string_view op;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  std::function<void(TensorImpl &out)> backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool consumed = false;     // set on a loss after its graph was run
  std::shared_ptr<Node> node;

  // Zero-filled on first use.
  std::vector<double> &GradBuffer();
};

// A reference-counted handle to a dense row-major double array.  Copies share
// storage; use Clone() or Detach() for an independent copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);
  static Tensor Scalar(double v);

  bool defined() const { return impl_ != nullptr; }
  const Shape &shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t i) const { return impl_->shape.at(i); }
  std::size_t numel() const { return impl_->data.size(); }

  std::span<const double> data() const { return impl_->data; }
  std::span<double> mutable_data() { return impl_->data; }
  double item() const;
  double operator[](std::size_t i) const { return impl_->data[i]; }
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor &set_requires_grad(bool on = true);
  bool is_leaf() const { return impl_->node == nullptr; }
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const { return impl_->grad; }
  void ZeroGrad();
  void ClearGrad() { impl_->grad.clear(); }

  // Same values, no history, requires_grad off.
  Tensor Detach() const;

  TensorImpl *impl() const { return impl_.get(); }
  const std::shared_ptr<TensorImpl> &shared_impl() const { return impl_; }
  static Tensor FromImpl(std::shared_ptr<TensorImpl> impl);

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Grad recording is on by default; a NoGradGuard turns it off for the current
// thread until it goes out of scope.
bool GradEnabled();
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;

 private:
  bool previous_;
};

// Multiply-accumulate counter for the current thread, bumped by every matmul
// (forward only).  Used to compare per-step decode work between networks.
std::uint64_t MacCount();
void ResetMacCount();
void AddMacs(std::uint64_t n);

// The topologically ordered record of a graph ending in a scalar loss.  Every
// node appears after the producers of all its inputs; Run() visits each node
// once in reverse order and then releases the graph.
class Tape {
 public:
  static Tape Record(const Tensor &loss);

  std::size_t size() const { return order_.size(); }
  const std::vector<TensorImpl *> &order() const { return order_; }

  void Run();

 private:
  Tensor loss_;
  std::vector<TensorImpl *> order_;
  bool done_ = false;
};

// Fills grad buffers of every requires_grad leaf reachable from `loss`.
// Gradients accumulate; call ZeroGrad() on parameters between steps.
void Backward(const Tensor &loss);

}  // namespace toktx::grad

#endif  // TOKTX_GRAD_TENSOR_H_
