// src/grad/tensor.cc
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

#include "toktx/grad/tensor.h"

#include <sstream>
#include <unordered_set>

namespace toktx::grad {

namespace {
thread_local bool g_grad_enabled = true;
thread_local std::uint64_t g_mac_count = 0;
}  // namespace

std::string ShapeString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t NumElements(const Shape &shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

ShapeError::ShapeError(std::string_view op, const Shape &a, const Shape &b)
    : std::invalid_argument(std::string(op) + ": incompatible shapes " +
                            ShapeString(a) + " and " + ShapeString(b)) {}

std::vector<double> &TensorImpl::GradBuffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

Tensor::Tensor(Shape shape, double fill) : impl_(std::make_shared<TensorImpl>()) {
  impl_->data.assign(NumElements(shape), fill);
  impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : impl_(std::make_shared<TensorImpl>()) {
  if (values.size() != NumElements(shape))
    throw ShapeError("tensor: " + std::to_string(values.size()) +
                     " values do not fill shape " + ShapeString(shape));
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

Tensor Tensor::Scalar(double v) { return Tensor(Shape{1}, std::vector<double>{v}); }

Tensor Tensor::FromImpl(std::shared_ptr<TensorImpl> impl) {
  Tensor t;
  t.impl_ = std::move(impl);
  return t;
}

double Tensor::item() const {
  if (numel() != 1)
    throw ShapeError("item: tensor of shape " + ShapeString(shape()) +
                     " is not a scalar");
  return impl_->data[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return impl_->data[r * impl_->shape.back() + c];
}

Tensor &Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  return *this;
}

void Tensor::ZeroGrad() {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::Detach() const { return Tensor(impl_->shape, impl_->data); }

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

std::uint64_t MacCount() { return g_mac_count; }
void ResetMacCount() { g_mac_count = 0; }
void AddMacs(std::uint64_t n) { g_mac_count += n; }

Tape Tape::Record(const Tensor &loss) {
  if (!loss.defined()) throw std::invalid_argument("backward: undefined loss");
  if (loss.numel() != 1)
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     ShapeString(loss.shape()));
  if (loss.impl()->consumed)
    throw std::logic_error("backward: graph of this loss was already run");
  if (!loss.requires_grad())
    throw std::logic_error("backward: loss does not require grad");

  Tape tape;
  tape.loss_ = loss;
  // Iterative post-order DFS; post-order over producers is a topological
  // order of the graph.
  std::unordered_set<TensorImpl *> seen;
  std::vector<std::pair<TensorImpl *, std::size_t>> stack;
  stack.emplace_back(loss.impl(), 0);
  seen.insert(loss.impl());
  while (!stack.empty()) {
    auto &[impl, next] = stack.back();
    const Node *node = impl->node.get();
    if (node && next < node->inputs.size()) {
      TensorImpl *child = node->inputs[next++].get();
      if (child->requires_grad && !seen.count(child)) {
        seen.insert(child);
        stack.emplace_back(child, 0);
      }
      continue;
    }
    tape.order_.push_back(impl);
    stack.pop_back();
  }
  return tape;
}

void Tape::Run() {
  if (done_) throw std::logic_error("backward: tape already run");
  done_ = true;
  TensorImpl *root = loss_.impl();
  root->GradBuffer()[0] += 1.0;
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    TensorImpl *impl = *it;
    if (impl->node && !impl->grad.empty()) impl->node->backward(*impl);
  }
  // Release the graph: interior nodes drop their history and gradients.
  for (TensorImpl *impl : order_) {
    if (impl->node) {
      impl->node.reset();
      if (impl != root) {
        impl->grad.clear();
        impl->grad.shrink_to_fit();
      }
    }
  }
  root->consumed = true;
}

void Backward(const Tensor &loss) { Tape::Record(loss).Run(); }

}  // namespace toktx::grad
