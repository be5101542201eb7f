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

#include "slimcast/entmax.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace slimcast::entmax {
namespace {

constexpr double kResidualTolerance = 1e-9;
constexpr double kSimplexTolerance = 1e-6;
constexpr int kMaxBisection = 100;

void require_nonempty(std::span<const double> z, const char* what) {
  if (z.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
}

double mass(std::span<const double> z, double scale, double tau, double exponent) {
  double total = 0.0;
  for (double v : z) {
    const double t = scale * v - tau;
    if (t > 0.0) total += exponent == 1.0 ? t : std::pow(t, exponent);
  }
  return total;
}

std::vector<std::size_t> support_of(std::span<const double> z, double scale, double tau) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (scale * z[i] > tau) support.push_back(i);
  }
  return support;
}

}  // namespace

Alpha::Alpha(double value) : value_(value) {
  if (!(value >= kMin && value <= kMax)) {
    throw std::invalid_argument("entmax alpha " + std::to_string(value) +
                                " outside [1.0, 2.5]");
  }
}

Threshold solve_threshold(std::span<const double> z, Alpha alpha) {
  require_nonempty(z, "solve_threshold");
  if (alpha.value() <= 1.0) {
    throw std::invalid_argument("solve_threshold: alpha must exceed 1 (softmax has no threshold)");
  }
  if (alpha.value() != 2.0) return solve_threshold_bisection(z, alpha);

  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double support_sum = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    if (1.0 + static_cast<double>(i + 1) * sorted[i] > cumulative) {
      k = i + 1;
      support_sum = cumulative;
    }
  }
  const double tau = (support_sum - 1.0) / static_cast<double>(k);
  return Threshold{tau, support_of(z, 1.0, tau)};
}

Threshold solve_threshold_bisection(std::span<const double> z, Alpha alpha) {
  require_nonempty(z, "solve_threshold_bisection");
  const double a = alpha.value();
  if (a <= 1.0) throw std::invalid_argument("solve_threshold_bisection: alpha must exceed 1");
  const double scale = a - 1.0;
  const double exponent = 1.0 / scale;
  const double top = scale * *std::max_element(z.begin(), z.end());

  // mass(lo) >= 1 since the maximum alone contributes 1; mass(hi) == 0.
  double lo = top - 1.0;
  double hi = top;
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mass(z, scale, mid, exponent) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double residual = mass(z, scale, lo, exponent) - 1.0;
  if (!(std::abs(residual) <= kResidualTolerance)) {
    throw std::runtime_error("solve_threshold_bisection: residual " + std::to_string(residual) +
                             " above tolerance");
  }
  return Threshold{lo, support_of(z, scale, lo)};
}

std::vector<double> softmax(std::span<const double> z) {
  require_nonempty(z, "softmax");
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> sparsemax(std::span<const double> z) {
  const Threshold t = solve_threshold(z, Alpha(2.0));
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::max(z[i] - t.tau, 0.0);
  return p;
}

void forward(std::span<const double> z, Alpha alpha, std::span<double> out) {
  require_nonempty(z, "entmax");
  if (out.size() != z.size()) throw std::invalid_argument("entmax: output size mismatch");
  const double a = alpha.value();
  if (a == 1.0) {
    const std::vector<double> p = softmax(z);
    std::copy(p.begin(), p.end(), out.begin());
    return;
  }
  const double scale = a - 1.0;
  const double exponent = 1.0 / scale;
  const Threshold t = solve_threshold(z, alpha);
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double v = scale * z[i] - t.tau;
    out[i] = v > 0.0 ? (exponent == 1.0 ? v : std::pow(v, exponent)) : 0.0;
    total += out[i];
  }
  for (double& v : out) v /= total;
}

std::vector<double> forward(std::span<const double> z, Alpha alpha) {
  std::vector<double> p(z.size());
  forward(z, alpha, p);
  return p;
}

std::vector<double> backward(std::span<const double> p, std::span<const double> upstream,
                             Alpha alpha) {
  require_nonempty(p, "entmax backward");
  if (p.size() != upstream.size()) {
    throw std::invalid_argument("entmax backward: p has " + std::to_string(p.size()) +
                                " entries, upstream " + std::to_string(upstream.size()));
  }
  double total = 0.0;
  for (double v : p) {
    if (v < -kSimplexTolerance) throw std::invalid_argument("entmax backward: negative p");
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("entmax backward: p sums to " + std::to_string(total));
  }
  const double power = 2.0 - alpha.value();
  std::vector<double> s(p.size(), 0.0);
  double s_total = 0.0;
  double s_dot_g = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      s[i] = power == 1.0 ? p[i] : (power == 0.0 ? 1.0 : std::pow(p[i], power));
      s_total += s[i];
      s_dot_g += s[i] * upstream[i];
    }
  }
  const double mean = s_dot_g / s_total;
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = s[i] * (upstream[i] - mean);
  return out;
}

Var apply(const Var& x, std::size_t axis, Alpha alpha) {
  const Shape& shape = x.shape();
  if (axis >= shape.size()) {
    throw std::invalid_argument("entmax::apply: axis " + std::to_string(axis) +
                                " beyond rank of " + to_string(shape));
  }
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t n = shape[axis];

  const Tensor& in = x.value();
  Tensor out(shape);
  std::vector<double> column(n);
  std::vector<double> result(n);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < inner; ++c) {
      const std::size_t base = o * n * inner + c;
      for (std::size_t j = 0; j < n; ++j) column[j] = in[base + j * inner];
      forward(column, alpha, result);
      for (std::size_t j = 0; j < n; ++j) out[base + j * inner] = result[j];
    }
  }
  return x.tape().record(
      std::move(out), {x}, [outer, inner, n, alpha](const BackwardContext& ctx) {
        Tensor& gx = *ctx.grads[0];
        std::vector<double> p(n);
        std::vector<double> g(n);
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t c = 0; c < inner; ++c) {
            const std::size_t base = o * n * inner + c;
            for (std::size_t j = 0; j < n; ++j) {
              p[j] = ctx.output[base + j * inner];
              g[j] = ctx.grad_output[base + j * inner];
            }
            const std::vector<double> d = backward(p, g, alpha);
            for (std::size_t j = 0; j < n; ++j) gx[base + j * inner] += d[j];
          }
        }
      });
}

}  // namespace slimcast::entmax
