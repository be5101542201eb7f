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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "slimcast/autodiff.hpp"

namespace slimcast::entmax {

/// Entmax exponent. 1 is softmax, 2 is sparsemax; values outside [1, 2.5] are rejected.
class Alpha {
 public:
  static constexpr double kMin = 1.0;
  static constexpr double kMax = 2.5;

  explicit Alpha(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

struct Threshold {
  double tau = 0.0;
  /// Indices i with (alpha - 1) * z_i > tau, ascending.
  std::vector<std::size_t> support;
};

/// tau such that sum_i [(alpha - 1) z_i - tau]_+^(1 / (alpha - 1)) = 1. Requires alpha > 1.
/// alpha == 2 uses the exact sort-based sparsemax threshold; other values bisect.
Threshold solve_threshold(std::span<const double> z, Alpha alpha);

/// Bisection route for any alpha > 1, including 2. The bracket
/// [(alpha-1) max z - 1, (alpha-1) max z] is halved until it collapses to adjacent doubles
/// or 100 iterations pass; the simplex residual is then guaranteed below 1e-9.
Threshold solve_threshold_bisection(std::span<const double> z, Alpha alpha);

/// Probability vector p_i = [(alpha - 1) z_i - tau]_+^(1 / (alpha - 1)).
std::vector<double> forward(std::span<const double> z, Alpha alpha);
void forward(std::span<const double> z, Alpha alpha, std::span<double> out);

std::vector<double> softmax(std::span<const double> z);
/// Exact projection onto the simplex by sorting.
std::vector<double> sparsemax(std::span<const double> z);

/// J^T * upstream for p = forward(z, alpha). With s_i = p_i^(2 - alpha) on the support:
/// J^T g = s * g - (<s, g> / <s, 1>) s. Rejects p off the simplex by more than 1e-6.
std::vector<double> backward(std::span<const double> p, std::span<const double> upstream,
                             Alpha alpha);

/// Tape operation normalizing every slice along `axis` with alpha-entmax.
Var apply(const Var& x, std::size_t axis, Alpha alpha);

}  // namespace slimcast::entmax
