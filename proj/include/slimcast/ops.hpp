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

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "slimcast/autodiff.hpp"

namespace slimcast::ops {

// All operations record onto the tape that owns their inputs and reject shape
// mismatches with std::invalid_argument naming both shapes.

/// Matrix product. `a` may carry leading batch axes: [..., k] x [k, n] -> [..., n].
Var matmul(const Var& a, const Var& b);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var shift(const Var& a, double offset);
/// Adds a vector along the last axis: [..., n] + [n].
Var add_bias(const Var& a, const Var& bias);

Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var abs(const Var& a);

/// Concatenation along the last axis; leading extents must agree.
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);

/// Stacks equally shaped inputs along a new axis inserted at `axis`.
Var stack(std::span<const Var> parts, std::size_t axis);

/// Selects entries `indices` along `axis`; repeated indices accumulate in backward.
Var gather(const Var& a, std::size_t axis, std::span<const std::size_t> indices);

Var reshape(const Var& a, Shape shape);

/// Sum of all elements, shape [1].
Var sum(const Var& a);

// Raw kernels shared with code that does not need the tape.
namespace kernels {
/// out[m x n] = a[m x k] * b[k x n], all row-major.
void gemm(const double* a, const double* b, double* out, std::size_t m, std::size_t k,
          std::size_t n);
inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
}  // namespace kernels

}  // namespace slimcast::ops
