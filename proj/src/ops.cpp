// Copyright 2026 The slimcast Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slimcast/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace slimcast::ops {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                                " vs " + to_string(b.shape()));
  }
}

template <class Forward, class Derivative>
Var unary(const Var& a, Forward forward, Derivative derivative) {
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = forward(x[i]);
  return a.tape().record(std::move(out), {a}, [derivative](const BackwardContext& ctx) {
    Tensor& gx = *ctx.grads[0];
    const Tensor& x = *ctx.inputs[0];
    for (std::size_t i = 0; i < x.size(); ++i) {
      gx[i] += ctx.grad_output[i] * derivative(x[i], ctx.output[i]);
    }
  });
}

// Views a shape as [outer, extent(axis), inner].
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

namespace kernels {

void gemm(const double* a, const double* b, double* out, std::size_t m, std::size_t k,
          std::size_t n) {
  MatrixMap(out, m, n).noalias() = ConstMatrixMap(a, m, k) * ConstMatrixMap(b, k, n);
}

}  // namespace kernels

Var matmul(const Var& a, const Var& b) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (as.empty() || bs.size() != 2 || as.back() != bs[0]) {
    throw std::invalid_argument("matmul: shape mismatch " + to_string(as) + " x " +
                                to_string(bs));
  }
  const std::size_t k = bs[0];
  const std::size_t n = bs[1];
  const std::size_t m = k == 0 ? 0 : a.value().size() / k;
  Shape out_shape = as;
  out_shape.back() = n;
  Tensor out(out_shape);
  if (m && k && n) kernels::gemm(a.value().raw(), b.value().raw(), out.raw(), m, k, n);
  return a.tape().record(std::move(out), {a, b}, [m, k, n](const BackwardContext& ctx) {
    if (!m || !k || !n) return;
    ConstMatrixMap g(ctx.grad_output.raw(), m, n);
    if (ctx.grads[0]) {
      MatrixMap(ctx.grads[0]->raw(), m, k).noalias() +=
          g * ConstMatrixMap(ctx.inputs[1]->raw(), k, n).transpose();
    }
    if (ctx.grads[1]) {
      MatrixMap(ctx.grads[1]->raw(), k, n).noalias() +=
          ConstMatrixMap(ctx.inputs[0]->raw(), m, k).transpose() * g;
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  Tensor out = a.value();
  out += b.value();
  return a.tape().record(std::move(out), {a, b}, [](const BackwardContext& ctx) {
    for (Tensor* g : ctx.grads) {
      if (g) *g += ctx.grad_output;
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return a.tape().record(std::move(out), {a, b}, [](const BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output;
    if (ctx.grads[0]) *ctx.grads[0] += g;
    if (ctx.grads[1]) {
      Tensor& gb = *ctx.grads[1];
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var hadamard(const Var& a, const Var& b) {
  require_same_shape("hadamard", a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return a.tape().record(std::move(out), {a, b}, [](const BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output;
    const Tensor& x = *ctx.inputs[0];
    const Tensor& y = *ctx.inputs[1];
    if (ctx.grads[0]) {
      Tensor& gx = *ctx.grads[0];
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i];
    }
    if (ctx.grads[1]) {
      Tensor& gy = *ctx.grads[1];
      for (std::size_t i = 0; i < g.size(); ++i) gy[i] += g[i] * x[i];
    }
  });
}

Var scale(const Var& a, double factor) {
  Tensor out = a.value();
  out *= factor;
  return a.tape().record(std::move(out), {a}, [factor](const BackwardContext& ctx) {
    Tensor& gx = *ctx.grads[0];
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * ctx.grad_output[i];
  });
}

Var shift(const Var& a, double offset) {
  Tensor out = a.value();
  for (double& v : out.data()) v += offset;
  return a.tape().record(std::move(out), {a}, [](const BackwardContext& ctx) {
    *ctx.grads[0] += ctx.grad_output;
  });
}

Var add_bias(const Var& a, const Var& bias) {
  const Shape& as = a.shape();
  const Shape& bs = bias.shape();
  if (as.empty() || bs.size() != 1 || bs[0] != as.back()) {
    throw std::invalid_argument("add_bias: shape mismatch " + to_string(as) + " + " +
                                to_string(bs));
  }
  const std::size_t n = bs[0];
  Tensor out = a.value();
  const Tensor& b = bias.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i % n];
  return a.tape().record(std::move(out), {a, bias}, [n](const BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output;
    if (ctx.grads[0]) *ctx.grads[0] += g;
    if (ctx.grads[1]) {
      Tensor& gb = *ctx.grads[1];
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % n] += g[i];
    }
  });
}

Var sigmoid(const Var& a) {
  return unary(
      a, [](double x) { return kernels::sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(const Var& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var abs(const Var& a) {
  return unary(
      a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (first.empty()) throw std::invalid_argument("concat: rank-0 input");
  const std::size_t rows = element_count(first) / std::max<std::size_t>(first.back(), 1);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size() || !std::equal(s.begin(), s.end() - 1, first.begin())) {
      throw std::invalid_argument("concat: shape mismatch " + to_string(first) + " vs " +
                                  to_string(s));
    }
    widths.push_back(s.back());
    total += s.back();
  }
  Shape out_shape = first;
  out_shape.back() = total;
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& src = parts[p].value();
    const std::size_t w = widths[p];
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(src.raw() + r * w, w, out.raw() + r * total + offset);
    }
    offset += w;
  }
  return parts[0].tape().record(
      std::move(out), parts, [rows, total, widths](const BackwardContext& ctx) {
        std::size_t offset = 0;
        for (std::size_t p = 0; p < widths.size(); ++p) {
          const std::size_t w = widths[p];
          if (Tensor* g = ctx.grads[p]) {
            for (std::size_t r = 0; r < rows; ++r) {
              const double* src = ctx.grad_output.raw() + r * total + offset;
              double* dst = g->raw() + r * w;
              for (std::size_t c = 0; c < w; ++c) dst[c] += src[c];
            }
          }
          offset += w;
        }
      });
}

Var stack(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw std::invalid_argument("stack: no inputs");
  const Shape& first = parts[0].shape();
  if (axis > first.size()) {
    throw std::invalid_argument("stack: axis " + std::to_string(axis) + " beyond rank of " +
                                to_string(first));
  }
  for (const Var& p : parts) {
    if (p.shape() != first) {
      throw std::invalid_argument("stack: shape mismatch " + to_string(first) + " vs " +
                                  to_string(p.shape()));
    }
  }
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
  const std::size_t inner = element_count(first) / std::max<std::size_t>(outer, 1);
  const std::size_t count = parts.size();
  Shape out_shape = first;
  out_shape.insert(out_shape.begin() + static_cast<std::ptrdiff_t>(axis), count);
  Tensor out(out_shape);
  for (std::size_t p = 0; p < count; ++p) {
    const Tensor& src = parts[p].value();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(src.raw() + o * inner, inner, out.raw() + (o * count + p) * inner);
    }
  }
  return parts[0].tape().record(
      std::move(out), parts, [outer, inner, count](const BackwardContext& ctx) {
        for (std::size_t p = 0; p < count; ++p) {
          Tensor* g = ctx.grads[p];
          if (!g) continue;
          for (std::size_t o = 0; o < outer; ++o) {
            const double* src = ctx.grad_output.raw() + (o * count + p) * inner;
            double* dst = g->raw() + o * inner;
            for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
          }
        }
      });
}

Var gather(const Var& a, std::size_t axis, std::span<const std::size_t> indices) {
  const Shape& shape = a.shape();
  if (axis >= shape.size()) {
    throw std::invalid_argument("gather: axis " + std::to_string(axis) + " beyond rank of " +
                                to_string(shape));
  }
  const AxisSplit s = split_at(shape, axis);
  for (std::size_t idx : indices) {
    if (idx >= s.extent) {
      throw std::out_of_range("gather: index " + std::to_string(idx) + " out of range for " +
                              to_string(shape) + " along axis " + std::to_string(axis));
    }
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  Shape out_shape = shape;
  out_shape[axis] = idx.size();
  Tensor out(out_shape);
  const Tensor& x = a.value();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      std::copy_n(x.raw() + (o * s.extent + idx[j]) * s.inner, s.inner,
                  out.raw() + (o * idx.size() + j) * s.inner);
    }
  }
  return a.tape().record(std::move(out), {a}, [s, idx](const BackwardContext& ctx) {
    Tensor& gx = *ctx.grads[0];
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const double* src = ctx.grad_output.raw() + (o * idx.size() + j) * s.inner;
        double* dst = gx.raw() + (o * s.extent + idx[j]) * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
      }
    }
  });
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return a.tape().record(std::move(out), {a}, [](const BackwardContext& ctx) {
    Tensor& gx = *ctx.grads[0];
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += ctx.grad_output[i];
  });
}

Var sum(const Var& a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return a.tape().record(Tensor::scalar(total), {a}, [](const BackwardContext& ctx) {
    const double g = ctx.grad_output[0];
    for (double& v : ctx.grads[0]->data()) v += g;
  });
}

}  // namespace slimcast::ops
