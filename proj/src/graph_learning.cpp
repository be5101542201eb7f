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

#include "slimcast/graph_learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "slimcast/init.hpp"
#include "slimcast/ops.hpp"

namespace slimcast::graph {

CandidateMatrix::CandidateMatrix(std::size_t nodes, std::size_t width, std::vector<NodeId> ids)
    : nodes_(nodes), width_(width), ids_(std::move(ids)) {
  if (ids_.size() != nodes_ * width_) {
    throw std::invalid_argument("CandidateMatrix: expected " + std::to_string(nodes_ * width_) +
                                " ids, got " + std::to_string(ids_.size()));
  }
  std::vector<char> seen(nodes_, 0);
  for (std::size_t i = 0; i < nodes_; ++i) {
    std::fill(seen.begin(), seen.end(), 0);
    for (NodeId id : row(i)) {
      if (id >= nodes_ || id == i || seen[id]) {
        throw std::invalid_argument("CandidateMatrix: row " + std::to_string(i) +
                                    " has invalid or repeated id " + std::to_string(id));
      }
      seen[id] = 1;
    }
  }
}

IndexSet::IndexSet(std::vector<NodeId> ids, std::size_t node_count)
    : ids_(std::move(ids)), node_count_(node_count) {
  std::vector<char> seen(node_count_, 0);
  for (NodeId id : ids_) {
    if (id >= node_count_) {
      throw std::out_of_range("IndexSet: node id " + std::to_string(id) + " outside [0, " +
                              std::to_string(node_count_) + ")");
    }
    if (seen[id]) throw std::invalid_argument("IndexSet: repeated id " + std::to_string(id));
    seen[id] = 1;
  }
}

IndexSet IndexSet::identity(std::size_t n) {
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  return IndexSet(std::move(ids), n);
}

CandidateMatrix init_candidates(std::size_t nodes, std::size_t width, std::uint64_t seed) {
  if (width < 1 || width >= nodes) {
    throw std::invalid_argument("init_candidates: need 1 <= M < N, got M=" +
                                std::to_string(width) + " N=" + std::to_string(nodes));
  }
  Rng rng(seed);
  std::vector<NodeId> ids(nodes * width);
  std::vector<NodeId> pool(nodes - 1);
  for (std::size_t i = 0; i < nodes; ++i) {
    // pool = all ids except i, then a partial Fisher-Yates shuffle of its prefix
    for (std::size_t k = 0, id = 0; id < nodes; ++id) {
      if (id != i) pool[k++] = id;
    }
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t pick = j + rng.uniform_index(pool.size() - j);
      std::swap(pool[j], pool[pick]);
      ids[i * width + j] = pool[j];
    }
  }
  return CandidateMatrix(nodes, width, std::move(ids));
}

IndexSet sample_significant_neighbors(const Tensor& embedding, CandidateMatrix& candidates,
                                      std::size_t top_k, std::uint64_t seed) {
  const std::size_t n = candidates.nodes();
  const std::size_t m = candidates.width();
  if (top_k >= m) {
    throw std::invalid_argument("sample_significant_neighbors: need K < M, got K=" +
                                std::to_string(top_k) + " M=" + std::to_string(m));
  }
  if (embedding.rank() != 2 || embedding.dim(0) != n) {
    throw std::invalid_argument("sample_significant_neighbors: embedding " +
                                to_string(embedding.shape()) + " does not match " +
                                std::to_string(n) + " nodes");
  }
  if (!embedding.all_finite()) {
    throw std::invalid_argument("sample_significant_neighbors: non-finite embedding");
  }
  const std::size_t d = embedding.dim(1);

  std::vector<std::pair<double, NodeId>> ranked(m);
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<NodeId> row = candidates.row(i);
    const double* ei = embedding.raw() + i * d;
    for (std::size_t j = 0; j < m; ++j) {
      const double* ej = embedding.raw() + row[j] * d;
      double sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) sq += (ei[c] - ej[c]) * (ei[c] - ej[c]);
      ranked[j] = {std::sqrt(sq), row[j]};
    }
    std::sort(ranked.begin(), ranked.end());
    for (std::size_t j = 0; j < m; ++j) row[j] = ranked[j].second;
    for (std::size_t j = 0; j < top_k; ++j) ++counts[row[j]];
  }

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return counts[a] > counts[b]; });

  std::vector<NodeId> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_k));
  std::vector<char> taken(n, 0);
  for (NodeId id : chosen) taken[id] = 1;
  std::vector<NodeId> rest;
  rest.reserve(n - top_k);
  for (NodeId id = 0; id < n; ++id) {
    if (!taken[id]) rest.push_back(id);
  }
  Rng rng(seed);
  for (std::size_t j = 0; j < m - top_k; ++j) {
    const std::size_t pick = j + rng.uniform_index(rest.size() - j);
    std::swap(rest[j], rest[pick]);
    chosen.push_back(rest[j]);
  }
  return IndexSet(std::move(chosen), n);
}

AttentionWeights::AttentionWeights(std::size_t embedding_dim, std::size_t head_count,
                                   std::size_t hidden_width, Rng& rng) {
  if (head_count == 0) throw std::invalid_argument("AttentionWeights: need at least one head");
  const std::size_t pair_dim = 2 * embedding_dim;
  heads.reserve(head_count);
  for (std::size_t p = 0; p < head_count; ++p) {
    const std::string prefix = "attention.head" + std::to_string(p);
    heads.push_back(AttentionHead{
        Parameter(prefix + ".hidden_weight",
                  init::fan_in_uniform({pair_dim, hidden_width}, pair_dim, rng)),
        Parameter(prefix + ".hidden_bias", Tensor({hidden_width})),
        Parameter(prefix + ".output_weight",
                  init::fan_in_uniform({hidden_width, 2}, hidden_width, rng)),
    });
  }
  projection = Parameter("attention.projection",
                         init::fan_in_uniform({2 * head_count, 1}, 2 * head_count, rng));
}

std::vector<Parameter*> AttentionWeights::parameters() {
  std::vector<Parameter*> out;
  for (AttentionHead& h : heads) {
    out.push_back(&h.hidden_weight);
    out.push_back(&h.hidden_bias);
    out.push_back(&h.output_weight);
  }
  out.push_back(&projection);
  return out;
}

Var pair_features(const Var& embedding, const IndexSet& index_set) {
  const Shape& es = embedding.shape();
  if (es.size() != 2) {
    throw std::invalid_argument("pair_features: embedding must be N x d, got " + to_string(es));
  }
  const std::size_t n = es[0];
  const std::size_t d = es[1];
  const std::size_t m = index_set.size();
  for (NodeId id : index_set.ids()) {
    if (id >= n) {
      throw std::out_of_range("pair_features: neighbor id " + std::to_string(id) +
                              " out of range for " + std::to_string(n) + " nodes");
    }
  }
  const Tensor& e = embedding.value();
  Tensor out({n, m, 2 * d});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double* dst = out.raw() + (i * m + j) * 2 * d;
      std::copy_n(e.raw() + i * d, d, dst);
      std::copy_n(e.raw() + index_set[j] * d, d, dst + d);
    }
  }
  std::vector<NodeId> ids = index_set.ids();
  return embedding.tape().record(
      std::move(out), {embedding}, [n, m, d, ids](const BackwardContext& ctx) {
        Tensor& ge = *ctx.grads[0];
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) {
            const double* src = ctx.grad_output.raw() + (i * m + j) * 2 * d;
            double* own = ge.raw() + i * d;
            double* other = ge.raw() + ids[j] * d;
            for (std::size_t c = 0; c < d; ++c) {
              own[c] += src[c];
              other[c] += src[d + c];
            }
          }
        }
      });
}

SlimAdjacency compute_slim_adjacency(Tape& tape, Parameter& embedding,
                                     const IndexSet& index_set, AttentionWeights& weights,
                                     entmax::Alpha alpha) {
  if (weights.heads.empty()) throw std::invalid_argument("compute_slim_adjacency: no heads");
  if (index_set.size() == 0) throw std::invalid_argument("compute_slim_adjacency: empty index set");
  const std::size_t n = embedding.value().dim(0);
  const std::size_t m = index_set.size();

  const Var e = tape.parameter(embedding);
  const Var pairs = pair_features(e, index_set);
  std::vector<Var> scores;
  scores.reserve(weights.heads.size());
  for (AttentionHead& head : weights.heads) {
    const Var hidden = ops::tanh(ops::add_bias(ops::matmul(pairs, tape.parameter(head.hidden_weight)),
                                               tape.parameter(head.hidden_bias)));
    const Var logits = ops::matmul(hidden, tape.parameter(head.output_weight));  // [N, M, 2]
    scores.push_back(entmax::apply(logits, 1, alpha));
  }
  const Var stacked = ops::concat(scores);  // [N, M, 2P]
  const Var projected = ops::matmul(stacked, tape.parameter(weights.projection));  // [N, M, 1]
  return SlimAdjacency{ops::relu(ops::reshape(projected, {n, m})), index_set};
}

}  // namespace slimcast::graph
