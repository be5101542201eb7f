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
#include <optional>
#include <string>
#include <vector>

#include "slimcast/autodiff.hpp"
#include "slimcast/graph_learning.hpp"
#include "slimcast/random.hpp"

namespace slimcast::diffusion {

/// J projection matrices W_0..W_{J-1}, each in_width x out_width.
struct DiffusionWeights {
  std::vector<Parameter> steps;

  DiffusionWeights() = default;
  /// Uniform in +-1/sqrt(J * in_width): the fan-in of the stacked diffusion features.
  DiffusionWeights(const std::string& prefix, std::size_t in_width, std::size_t out_width,
                   std::size_t depth, Rng& rng);

  std::size_t depth() const noexcept { return steps.size(); }
  std::size_t in_width() const { return steps.at(0).shape()[0]; }
  std::size_t out_width() const { return steps.at(0).shape()[1]; }
  std::vector<Parameter*> parameters();
};

/// One normalized diffusion over the slim adjacency:
///   y_b = (D + I)^-1 (A x_b[I] + x_b),  D = diag(row sums of A, clamped at 0)
/// with A: [N, M], x: [B, N, c]. Costs O(B N M c) and never forms an N x N object.
Var diffusion_step(const Var& adjacency, const graph::IndexSet& index_set, const Var& x);

/// H^(0) = x, H^(j) = diffusion_step(H^(j-1)) for j < depth.
std::vector<Var> diffusion_iterates(const graph::SlimAdjacency& adjacency, const Var& x,
                                    std::size_t depth);

/// sum_j H^(j) W_j.
Var project_iterates(std::span<const Var> iterates, DiffusionWeights& weights);

/// Graph convolution sum_{j<J} H^(j) W_j over the slim adjacency.
Var fast_graph_conv(const graph::SlimAdjacency& adjacency, const Var& x,
                    DiffusionWeights& weights);

/// Weights of one graph-convolutional GRU cell. `output` is absent for cells whose
/// predictions are never read (the encoder).
struct GruWeights {
  DiffusionWeights reset;
  DiffusionWeights update;
  DiffusionWeights candidate;
  Parameter reset_bias;
  Parameter update_bias;
  Parameter candidate_bias;
  std::optional<Parameter> output;

  GruWeights() = default;
  GruWeights(const std::string& prefix, std::size_t input_width, std::size_t hidden_width,
             std::size_t output_width, std::size_t depth, Rng& rng);

  std::size_t input_width() const { return reset.in_width() - hidden_width(); }
  std::size_t hidden_width() const { return reset_bias.shape()[0]; }
  std::vector<Parameter*> parameters();
};

struct CellOutput {
  Var hidden;
  /// H_t W_x; empty when the cell has no output projection.
  Var prediction;
};

/// R = sigmoid(conv_r([X, H]) + b_r), Z = sigmoid(conv_z([X, H]) + b_z),
/// C = tanh(conv_h([X, R * H]) + b_h), H' = Z * H + (1 - Z) * C, X^ = H' W_x.
CellOutput one_step_fast_gconv(const graph::SlimAdjacency& adjacency, const Var& x,
                               const Var& hidden, GruWeights& weights);

}  // namespace slimcast::diffusion
