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

#include "slimcast/diffusion.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <stdexcept>
#include <string>

#include "slimcast/init.hpp"
#include "slimcast/ops.hpp"

namespace slimcast::diffusion {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

Eigen::VectorXd inverse_degree(const Tensor& a, std::size_t n, std::size_t m) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < m; ++j) deg += a[i * m + j];
    s[static_cast<Eigen::Index>(i)] = 1.0 / (1.0 + std::max(deg, 0.0));
  }
  return s;
}

}  // namespace

DiffusionWeights::DiffusionWeights(const std::string& prefix, std::size_t in_width,
                                   std::size_t out_width, std::size_t depth, Rng& rng) {
  if (depth == 0) throw std::invalid_argument("DiffusionWeights: depth must be >= 1");
  steps.reserve(depth);
  for (std::size_t j = 0; j < depth; ++j) {
    steps.emplace_back(prefix + ".w" + std::to_string(j),
                       init::fan_in_uniform({in_width, out_width}, depth * in_width, rng));
  }
}

std::vector<Parameter*> DiffusionWeights::parameters() {
  std::vector<Parameter*> out;
  for (Parameter& p : steps) out.push_back(&p);
  return out;
}

Var diffusion_step(const Var& adjacency, const graph::IndexSet& index_set, const Var& x) {
  const Shape& as = adjacency.shape();
  const Shape& xs = x.shape();
  if (as.size() != 2 || xs.size() != 3 || xs[1] != as[0] || as[1] != index_set.size()) {
    throw std::invalid_argument("diffusion_step: adjacency " + to_string(as) + ", input " +
                                to_string(xs) + ", index set of " +
                                std::to_string(index_set.size()));
  }
  const std::size_t batch = xs[0];
  const std::size_t n = xs[1];
  const std::size_t c = xs[2];
  const std::size_t m = as[1];
  for (graph::NodeId id : index_set.ids()) {
    if (id >= n) {
      throw std::out_of_range("diffusion_step: neighbor id " + std::to_string(id) +
                              " out of range for " + std::to_string(n) + " nodes");
    }
  }
  const Tensor& a = adjacency.value();
  if (!a.all_finite()) throw std::invalid_argument("diffusion_step: non-finite adjacency");

  const Eigen::VectorXd s = inverse_degree(a, n, m);
  const ConstMatrixMap amat(a.raw(), n, m);
  const std::vector<graph::NodeId> ids = index_set.ids();
  Tensor out(xs);
  RowMatrix gathered(m, c);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x.value().raw() + b * n * c;
    for (std::size_t j = 0; j < m; ++j) {
      std::copy_n(xb + ids[j] * c, c, gathered.data() + j * c);
    }
    MatrixMap yb(out.raw() + b * n * c, n, c);
    yb.noalias() = amat * gathered;
    yb += ConstMatrixMap(xb, n, c);
    yb = s.asDiagonal() * yb;
  }

  return adjacency.tape().record(
      std::move(out), {adjacency, x}, [batch, n, c, m, ids](const BackwardContext& ctx) {
        const Tensor& a = *ctx.inputs[0];
        const Tensor& x = *ctx.inputs[1];
        const Eigen::VectorXd s = inverse_degree(a, n, m);
        const ConstMatrixMap amat(a.raw(), n, m);
        RowMatrix gathered(m, c);
        RowMatrix scaled(n, c);
        RowMatrix gx_gathered(m, c);
        for (std::size_t b = 0; b < batch; ++b) {
          const double* xb = x.raw() + b * n * c;
          const ConstMatrixMap gb(ctx.grad_output.raw() + b * n * c, n, c);
          scaled.noalias() = s.asDiagonal() * gb;
          if (Tensor* gx = ctx.grads[1]) {
            MatrixMap(gx->raw() + b * n * c, n, c) += scaled;
            gx_gathered.noalias() = amat.transpose() * scaled;
            for (std::size_t j = 0; j < m; ++j) {
              double* dst = gx->raw() + b * n * c + ids[j] * c;
              const double* src = gx_gathered.data() + j * c;
              for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
            }
          }
          if (Tensor* ga = ctx.grads[0]) {
            for (std::size_t j = 0; j < m; ++j) {
              std::copy_n(xb + ids[j] * c, c, gathered.data() + j * c);
            }
            const ConstMatrixMap yb(ctx.output.raw() + b * n * c, n, c);
            MatrixMap gam(ga->raw(), n, m);
            gam.noalias() += scaled * gathered.transpose();
            // The degree clamp at zero has no slope on rows with negative sums.
            const Eigen::VectorXd through_degree = (scaled.cwiseProduct(yb)).rowwise().sum();
            for (std::size_t i = 0; i < n; ++i) {
              if (amat.row(static_cast<Eigen::Index>(i)).sum() >= 0.0) {
                gam.row(static_cast<Eigen::Index>(i)).array() -=
                    through_degree[static_cast<Eigen::Index>(i)];
              }
            }
          }
        }
      });
}

std::vector<Var> diffusion_iterates(const graph::SlimAdjacency& adjacency, const Var& x,
                                    std::size_t depth) {
  if (depth == 0) throw std::invalid_argument("diffusion_iterates: depth must be >= 1");
  std::vector<Var> out{x};
  for (std::size_t j = 1; j < depth; ++j) {
    out.push_back(diffusion_step(adjacency.values, adjacency.index_set, out.back()));
  }
  return out;
}

Var project_iterates(std::span<const Var> iterates, DiffusionWeights& weights) {
  if (iterates.size() != weights.depth()) {
    throw std::invalid_argument("project_iterates: " + std::to_string(iterates.size()) +
                                " iterates for depth " + std::to_string(weights.depth()));
  }
  Tape& tape = iterates[0].tape();
  Var out = ops::matmul(iterates[0], tape.parameter(weights.steps[0]));
  for (std::size_t j = 1; j < iterates.size(); ++j) {
    out = ops::add(out, ops::matmul(iterates[j], tape.parameter(weights.steps[j])));
  }
  return out;
}

Var fast_graph_conv(const graph::SlimAdjacency& adjacency, const Var& x,
                    DiffusionWeights& weights) {
  const std::vector<Var> iterates = diffusion_iterates(adjacency, x, weights.depth());
  return project_iterates(iterates, weights);
}

GruWeights::GruWeights(const std::string& prefix, std::size_t input_width,
                       std::size_t hidden_width, std::size_t output_width, std::size_t depth,
                       Rng& rng)
    : reset(prefix + ".reset", input_width + hidden_width, hidden_width, depth, rng),
      update(prefix + ".update", input_width + hidden_width, hidden_width, depth, rng),
      candidate(prefix + ".candidate", input_width + hidden_width, hidden_width, depth, rng),
      reset_bias(prefix + ".reset_bias", Tensor({hidden_width})),
      update_bias(prefix + ".update_bias", Tensor({hidden_width})),
      candidate_bias(prefix + ".candidate_bias", Tensor({hidden_width})) {
  if (output_width > 0) {
    output.emplace(prefix + ".output",
                   init::fan_in_uniform({hidden_width, output_width}, hidden_width, rng));
  }
}

std::vector<Parameter*> GruWeights::parameters() {
  std::vector<Parameter*> out;
  for (DiffusionWeights* w : {&reset, &update, &candidate}) {
    for (Parameter* p : w->parameters()) out.push_back(p);
  }
  out.push_back(&reset_bias);
  out.push_back(&update_bias);
  out.push_back(&candidate_bias);
  if (output) out.push_back(&*output);
  return out;
}

CellOutput one_step_fast_gconv(const graph::SlimAdjacency& adjacency, const Var& x,
                               const Var& hidden, GruWeights& weights) {
  const Shape& xs = x.shape();
  const Shape& hs = hidden.shape();
  const std::size_t d = weights.hidden_width();
  if (xs.size() != 3 || hs.size() != 3 || xs[0] != hs[0] || xs[1] != hs[1] || hs[2] != d ||
      xs[2] != weights.input_width()) {
    throw std::invalid_argument("one_step_fast_gconv: input " + to_string(xs) + ", hidden " +
                                to_string(hs) + " for a cell with input width " +
                                std::to_string(weights.input_width()) + ", hidden width " +
                                std::to_string(d));
  }
  Tape& tape = x.tape();
  const std::size_t depth = weights.reset.depth();

  const Var joined = ops::concat({x, hidden});
  const std::vector<Var> iterates = diffusion_iterates(adjacency, joined, depth);
  const Var reset_gate = ops::sigmoid(ops::add_bias(project_iterates(iterates, weights.reset),
                                                    tape.parameter(weights.reset_bias)));
  const Var update_gate = ops::sigmoid(ops::add_bias(
      project_iterates(iterates, weights.update), tape.parameter(weights.update_bias)));

  const Var gated = ops::concat({x, ops::hadamard(reset_gate, hidden)});
  const Var candidate = ops::tanh(ops::add_bias(fast_graph_conv(adjacency, gated, weights.candidate),
                                                tape.parameter(weights.candidate_bias)));
  // Z * H + (1 - Z) * C == C + Z * (H - C)
  const Var next = ops::add(candidate, ops::hadamard(update_gate, ops::sub(hidden, candidate)));

  CellOutput result{next, Var()};
  if (weights.output) result.prediction = ops::matmul(next, tape.parameter(*weights.output));
  return result;
}

}  // namespace slimcast::diffusion
