// src/grad/ops.cc
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

#include "toktx/grad/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

namespace toktx::grad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

// Builds the output tensor and, when needed, its graph node.
Tensor MakeResult(Shape shape, std::vector<double> values, std::string_view op,
                  std::vector<Tensor> inputs,
                  std::function<void(TensorImpl &out)> backward) {
  Tensor out(std::move(shape), std::move(values));
  bool record = false;
  if (GradEnabled())
    for (const auto &t : inputs) record = record || t.requires_grad();
  if (record) {
    auto node = std::make_shared<Node>();
    node->op = op;
    for (auto &t : inputs) node->inputs.push_back(t.shared_impl());
    node->backward = std::move(backward);
    out.impl()->node = std::move(node);
    out.impl()->requires_grad = true;
  }
  return out;
}

bool IsSuffix(const Shape &big, const Shape &small) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

void CheckBroadcast(std::string_view op, const Tensor &a, const Tensor &b) {
  if (!IsSuffix(a.shape(), b.shape())) throw ShapeError(op, a.shape(), b.shape());
}

void Check2D(std::string_view op, const Tensor &a) {
  if (a.rank() != 2)
    throw ShapeError(std::string(op) + ": expected a 2-D tensor, got " +
                     ShapeString(a.shape()));
}

// Shared shape for elementwise unary ops whose derivative depends only on the
// output value.
template <typename F, typename DF>
Tensor Unary(const Tensor &a, std::string_view op, F f, DF df_from_out) {
  std::vector<double> v(a.numel());
  auto x = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(x[i]);
  TensorImpl *pa = a.impl();
  return MakeResult(a.shape(), std::move(v), op, {a}, [pa, df_from_out](TensorImpl &out) {
    if (!pa->requires_grad) return;
    auto &g = pa->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] += out.grad[i] * df_from_out(out.data[i], pa->data[i]);
  });
}

}  // namespace

Tensor Add(const Tensor &a, const Tensor &b) {
  CheckBroadcast("add", a, b);
  const std::size_t n = a.numel(), m = b.numel();
  std::vector<double> v(a.data().begin(), a.data().end());
  auto y = b.data();
  for (std::size_t i = 0; i < n; ++i) v[i] += y[i % m];
  TensorImpl *pa = a.impl(), *pb = b.impl();
  return MakeResult(a.shape(), std::move(v), "add", {a, b}, [pa, pb, m](TensorImpl &out) {
    if (pa->requires_grad) {
      auto &g = pa->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i];
    }
    if (pb->requires_grad) {
      auto &g = pb->GradBuffer();
      for (std::size_t i = 0; i < out.grad.size(); ++i) g[i % m] += out.grad[i];
    }
  });
}

Tensor Sub(const Tensor &a, const Tensor &b) {
  CheckBroadcast("sub", a, b);
  const std::size_t n = a.numel(), m = b.numel();
  std::vector<double> v(a.data().begin(), a.data().end());
  auto y = b.data();
  for (std::size_t i = 0; i < n; ++i) v[i] -= y[i % m];
  TensorImpl *pa = a.impl(), *pb = b.impl();
  return MakeResult(a.shape(), std::move(v), "sub", {a, b}, [pa, pb, m](TensorImpl &out) {
    if (pa->requires_grad) {
      auto &g = pa->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i];
    }
    if (pb->requires_grad) {
      auto &g = pb->GradBuffer();
      for (std::size_t i = 0; i < out.grad.size(); ++i) g[i % m] -= out.grad[i];
    }
  });
}

Tensor Mul(const Tensor &a, const Tensor &b) {
  CheckBroadcast("mul", a, b);
  const std::size_t n = a.numel(), m = b.numel();
  std::vector<double> v(n);
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < n; ++i) v[i] = x[i] * y[i % m];
  TensorImpl *pa = a.impl(), *pb = b.impl();
  return MakeResult(a.shape(), std::move(v), "mul", {a, b}, [pa, pb, m](TensorImpl &out) {
    if (pa->requires_grad) {
      auto &g = pa->GradBuffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i] * pb->data[i % m];
    }
    if (pb->requires_grad) {
      auto &g = pb->GradBuffer();
      for (std::size_t i = 0; i < out.grad.size(); ++i)
        g[i % m] += out.grad[i] * pa->data[i];
    }
  });
}

Tensor Scale(const Tensor &a, double c) {
  return Unary(
      a, "scale", [c](double x) { return c * x; },
      [c](double, double) { return c; });
}

Tensor AddScalar(const Tensor &a, double c) {
  return Unary(
      a, "add_scalar", [c](double x) { return x + c; },
      [](double, double) { return 1.0; });
}

Tensor MatMul(const Tensor &a, const Tensor &b) {
  Check2D("matmul", a);
  Check2D("matmul", b);
  if (a.dim(1) != b.dim(0)) throw ShapeError("matmul", a.shape(), b.shape());
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  std::vector<double> v(n * m);
  MutMap(v.data(), n, m).noalias() =
      ConstMap(a.data().data(), n, k) * ConstMap(b.data().data(), k, m);
  AddMacs(static_cast<std::uint64_t>(n) * k * m);
  TensorImpl *pa = a.impl(), *pb = b.impl();
  return MakeResult({n, m}, std::move(v), "matmul", {a, b}, [pa, pb, n, k, m](TensorImpl &out) {
    ConstMap gout(out.grad.data(), n, m);
    if (pa->requires_grad) {
      MutMap(pa->GradBuffer().data(), n, k).noalias() +=
          gout * ConstMap(pb->data.data(), k, m).transpose();
    }
    if (pb->requires_grad) {
      MutMap(pb->GradBuffer().data(), k, m).noalias() +=
          ConstMap(pa->data.data(), n, k).transpose() * gout;
    }
  });
}

Tensor Transpose(const Tensor &a) {
  Check2D("transpose", a);
  const std::size_t n = a.dim(0), m = a.dim(1);
  std::vector<double> v(n * m);
  MutMap(v.data(), m, n) = ConstMap(a.data().data(), n, m).transpose();
  TensorImpl *pa = a.impl();
  return MakeResult({m, n}, std::move(v), "transpose", {a}, [pa, n, m](TensorImpl &out) {
    if (!pa->requires_grad) return;
    MutMap(pa->GradBuffer().data(), n, m) += ConstMap(out.grad.data(), m, n).transpose();
  });
}

Tensor Tanh(const Tensor &a) {
  return Unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double y, double) { return 1.0 - y * y; });
}

Tensor Sigmoid(const Tensor &a) {
  return Unary(
      a, "sigmoid",
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double y, double) { return y * (1.0 - y); });
}

Tensor Relu(const Tensor &a) {
  return Unary(
      a, "relu", [](double x) { return x > 0 ? x : 0.0; },
      [](double, double x) { return x > 0 ? 1.0 : 0.0; });
}

Tensor Exp(const Tensor &a) {
  return Unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double y, double) { return y; });
}

Tensor LogSoftmax(const Tensor &a) {
  if (a.rank() == 0 || a.numel() == 0) throw ShapeError("log_softmax: empty tensor");
  const std::size_t d = a.shape().back(), rows = a.numel() / d;
  std::vector<double> v(a.numel());
  auto x = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double *xr = x.data() + r * d;
    double mx = *std::max_element(xr, xr + d);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += std::exp(xr[j] - mx);
    double lse = mx + std::log(s);
    for (std::size_t j = 0; j < d; ++j) v[r * d + j] = xr[j] - lse;
  }
  TensorImpl *pa = a.impl();
  return MakeResult(a.shape(), std::move(v), "log_softmax", {a}, [pa, rows, d](TensorImpl &out) {
    if (!pa->requires_grad) return;
    auto &g = pa->GradBuffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double *go = out.grad.data() + r * d;
      const double *y = out.data.data() + r * d;
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += go[j];
      for (std::size_t j = 0; j < d; ++j) g[r * d + j] += go[j] - std::exp(y[j]) * s;
    }
  });
}

Tensor Softmax(const Tensor &a) {
  if (a.rank() == 0 || a.numel() == 0) throw ShapeError("softmax: empty tensor");
  const std::size_t d = a.shape().back(), rows = a.numel() / d;
  std::vector<double> v(a.numel());
  auto x = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double *xr = x.data() + r * d;
    double mx = *std::max_element(xr, xr + d);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += (v[r * d + j] = std::exp(xr[j] - mx));
    for (std::size_t j = 0; j < d; ++j) v[r * d + j] /= s;
  }
  TensorImpl *pa = a.impl();
  return MakeResult(a.shape(), std::move(v), "softmax", {a}, [pa, rows, d](TensorImpl &out) {
    if (!pa->requires_grad) return;
    auto &g = pa->GradBuffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double *go = out.grad.data() + r * d;
      const double *y = out.data.data() + r * d;
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += go[j] * y[j];
      for (std::size_t j = 0; j < d; ++j) g[r * d + j] += y[j] * (go[j] - dot);
    }
  });
}

Tensor LayerNorm(const Tensor &a, double eps) {
  if (a.rank() == 0 || a.numel() == 0) throw ShapeError("layer_norm: empty tensor");
  const std::size_t d = a.shape().back(), rows = a.numel() / d;
  std::vector<double> v(a.numel());
  std::vector<double> inv_std(rows);
  auto x = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double *xr = x.data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= d;
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= d;
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) v[r * d + j] = (xr[j] - mean) * inv_std[r];
  }
  TensorImpl *pa = a.impl();
  return MakeResult(a.shape(), std::move(v), "layer_norm", {a},
                    [pa, rows, d, inv_std = std::move(inv_std)](TensorImpl &out) {
                      if (!pa->requires_grad) return;
                      auto &g = pa->GradBuffer();
                      for (std::size_t r = 0; r < rows; ++r) {
                        const double *go = out.grad.data() + r * d;
                        const double *y = out.data.data() + r * d;
                        double sum_g = 0.0, sum_gy = 0.0;
                        for (std::size_t j = 0; j < d; ++j) {
                          sum_g += go[j];
                          sum_gy += go[j] * y[j];
                        }
                        for (std::size_t j = 0; j < d; ++j)
                          g[r * d + j] += inv_std[r] * (go[j] - sum_g / d - y[j] * sum_gy / d);
                      }
                    });
}

Tensor Gather(const Tensor &table, std::span<const int> ids) {
  Check2D("gather", table);
  const std::size_t n = table.dim(0), d = table.dim(1);
  std::vector<double> v(ids.size() * d);
  auto x = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= n)
      throw std::out_of_range("gather: id " + std::to_string(ids[i]) +
                              " outside table of " + std::to_string(n) + " rows");
    std::copy_n(x.data() + ids[i] * d, d, v.data() + i * d);
  }
  TensorImpl *pt = table.impl();
  std::vector<int> idx(ids.begin(), ids.end());
  return MakeResult({ids.size(), d}, std::move(v), "gather", {table},
                    [pt, d, idx = std::move(idx)](TensorImpl &out) {
                      if (!pt->requires_grad) return;
                      auto &g = pt->GradBuffer();
                      for (std::size_t i = 0; i < idx.size(); ++i)
                        for (std::size_t j = 0; j < d; ++j) g[idx[i] * d + j] += out.grad[i * d + j];
                    });
}

Tensor Concat(const std::vector<Tensor> &parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const auto &p : parts) Check2D("concat", p);
  const std::size_t keep = parts[0].dim(axis == 0 ? 1 : 0);
  std::size_t total = 0;
  for (const auto &p : parts) {
    if (p.dim(axis == 0 ? 1 : 0) != keep) throw ShapeError("concat", parts[0].shape(), p.shape());
    total += p.dim(axis);
  }
  const std::size_t rows = axis == 0 ? total : keep, cols = axis == 0 ? keep : total;
  std::vector<double> v(rows * cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto &p : parts) {
    offsets.push_back(off);
    auto x = p.data();
    const std::size_t pr = p.dim(0), pc = p.dim(1);
    for (std::size_t r = 0; r < pr; ++r)
      for (std::size_t c = 0; c < pc; ++c) {
        if (axis == 0)
          v[(off + r) * cols + c] = x[r * pc + c];
        else
          v[r * cols + off + c] = x[r * pc + c];
      }
    off += p.dim(axis);
  }
  std::vector<TensorImpl *> ps;
  for (const auto &p : parts) ps.push_back(p.impl());
  return MakeResult({rows, cols}, std::move(v), "concat", parts,
                    [ps, offsets, axis, cols](TensorImpl &out) {
                      for (std::size_t i = 0; i < ps.size(); ++i) {
                        TensorImpl *p = ps[i];
                        if (!p->requires_grad) continue;
                        auto &g = p->GradBuffer();
                        const std::size_t pr = p->shape[0], pc = p->shape[1];
                        for (std::size_t r = 0; r < pr; ++r)
                          for (std::size_t c = 0; c < pc; ++c)
                            g[r * pc + c] += axis == 0 ? out.grad[(offsets[i] + r) * cols + c]
                                                       : out.grad[r * cols + offsets[i] + c];
                      }
                    });
}

Tensor Slice(const Tensor &a, int axis, std::size_t begin, std::size_t end) {
  Check2D("slice", a);
  if (axis != 0 && axis != 1) throw ShapeError("slice: axis must be 0 or 1");
  if (begin > end || end > a.dim(axis))
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside axis " + std::to_string(axis) + " of " + ShapeString(a.shape()));
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  const std::size_t orows = axis == 0 ? end - begin : rows;
  const std::size_t ocols = axis == 0 ? cols : end - begin;
  std::vector<double> v(orows * ocols);
  auto x = a.data();
  for (std::size_t r = 0; r < orows; ++r)
    for (std::size_t c = 0; c < ocols; ++c)
      v[r * ocols + c] = axis == 0 ? x[(begin + r) * cols + c] : x[r * cols + begin + c];
  TensorImpl *pa = a.impl();
  return MakeResult({orows, ocols}, std::move(v), "slice", {a},
                    [pa, axis, begin, orows, ocols, cols](TensorImpl &out) {
                      if (!pa->requires_grad) return;
                      auto &g = pa->GradBuffer();
                      for (std::size_t r = 0; r < orows; ++r)
                        for (std::size_t c = 0; c < ocols; ++c) {
                          double go = out.grad[r * ocols + c];
                          if (axis == 0)
                            g[(begin + r) * cols + c] += go;
                          else
                            g[r * cols + begin + c] += go;
                        }
                    });
}

Tensor Reshape(const Tensor &a, Shape shape) {
  if (NumElements(shape) != a.numel()) throw ShapeError("reshape", a.shape(), shape);
  std::vector<double> v(a.data().begin(), a.data().end());
  TensorImpl *pa = a.impl();
  return MakeResult(std::move(shape), std::move(v), "reshape", {a}, [pa](TensorImpl &out) {
    if (!pa->requires_grad) return;
    auto &g = pa->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i];
  });
}

Tensor Sum(const Tensor &a) {
  double s = 0.0;
  for (double x : a.data()) s += x;
  TensorImpl *pa = a.impl();
  return MakeResult({1}, {s}, "sum", {a}, [pa](TensorImpl &out) {
    if (!pa->requires_grad) return;
    for (double &g : pa->GradBuffer()) g += out.grad[0];
  });
}

Tensor Mean(const Tensor &a) {
  if (a.numel() == 0) throw ShapeError("mean: empty tensor");
  return Scale(Sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor LogSumExp(const Tensor &a) {
  if (a.numel() == 0) throw ShapeError("logsumexp: empty tensor");
  auto x = a.data();
  double mx = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double xi : x) s += std::exp(xi - mx);
  double lse = mx + std::log(s);
  TensorImpl *pa = a.impl();
  return MakeResult({1}, {lse}, "logsumexp", {a}, [pa](TensorImpl &out) {
    if (!pa->requires_grad) return;
    auto &g = pa->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] += out.grad[0] * std::exp(pa->data[i] - out.data[0]);
  });
}

Tensor MeanRows(const Tensor &a) {
  Check2D("mean_rows", a);
  const std::size_t n = a.dim(0), d = a.dim(1);
  if (n == 0) throw ShapeError("mean_rows: no rows");
  std::vector<double> v(d, 0.0);
  auto x = a.data();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) v[j] += x[r * d + j];
  for (double &e : v) e /= n;
  TensorImpl *pa = a.impl();
  return MakeResult({d}, std::move(v), "mean_rows", {a}, [pa, n, d](TensorImpl &out) {
    if (!pa->requires_grad) return;
    auto &g = pa->GradBuffer();
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < d; ++j) g[r * d + j] += out.grad[j] / n;
  });
}

}  // namespace toktx::grad
