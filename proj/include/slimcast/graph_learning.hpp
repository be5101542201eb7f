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
#include <cstdint>
#include <span>
#include <vector>

#include "slimcast/autodiff.hpp"
#include "slimcast/entmax.hpp"
#include "slimcast/random.hpp"

namespace slimcast::graph {

using NodeId = std::size_t;

/// N x M matrix of candidate neighbor ids. Row i holds M distinct ids, never i itself.
/// Membership is fixed at construction; sampling reorders rows in place.
class CandidateMatrix {
 public:
  CandidateMatrix() = default;
  CandidateMatrix(std::size_t nodes, std::size_t width, std::vector<NodeId> ids);

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t width() const noexcept { return width_; }
  std::span<NodeId> row(std::size_t i) { return {ids_.data() + i * width_, width_}; }
  std::span<const NodeId> row(std::size_t i) const { return {ids_.data() + i * width_, width_}; }
  const std::vector<NodeId>& ids() const noexcept { return ids_; }

  friend bool operator==(const CandidateMatrix&, const CandidateMatrix&) = default;

 private:
  std::size_t nodes_ = 0;
  std::size_t width_ = 0;
  std::vector<NodeId> ids_;
};

/// Ordered set of distinct node ids shared by every node as its neighbor pool.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::vector<NodeId> ids, std::size_t node_count);

  /// 0..n-1, the dense (full adjacency) configuration.
  static IndexSet identity(std::size_t n);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t node_count() const noexcept { return node_count_; }
  const std::vector<NodeId>& ids() const noexcept { return ids_; }
  NodeId operator[](std::size_t j) const noexcept { return ids_[j]; }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<NodeId> ids_;
  std::size_t node_count_ = 0;
};

/// Random candidate rows: M distinct uniform draws from {0..N-1} \ {i}. Requires 1 <= M < N.
CandidateMatrix init_candidates(std::size_t nodes, std::size_t width, std::uint64_t seed);

/// Significant-neighbor sampling over node embeddings `embedding` (N x d):
///  1. sort every candidate row by Euclidean distance to its node (ties: lower id first);
///  2. count id occurrences in the first K columns of all rows;
///  3. keep the K most frequent ids (ties: lower id first);
///  4. fill the remaining M - K slots uniformly from the other nodes.
/// The result lists the K frequent ids in rank order followed by the random fill.
IndexSet sample_significant_neighbors(const Tensor& embedding, CandidateMatrix& candidates,
                                      std::size_t top_k, std::uint64_t seed);

/// One attention head: FFN with a tanh hidden layer mapping a 2d pair feature to 2 scores.
/// There is no output bias; entmax is shift invariant along the candidate axis.
struct AttentionHead {
  Parameter hidden_weight;  // 2d x hidden
  Parameter hidden_bias;    // hidden
  Parameter output_weight;  // hidden x 2
};

struct AttentionWeights {
  std::vector<AttentionHead> heads;
  Parameter projection;  // 2P x 1

  AttentionWeights() = default;
  /// Weights uniform in +-1/sqrt(fan_in); hidden biases zero.
  AttentionWeights(std::size_t embedding_dim, std::size_t head_count, std::size_t hidden_width,
                   Rng& rng);

  std::vector<Parameter*> parameters();
};

/// Adjacency restricted to the columns named by `index_set` (N x M on the tape).
struct SlimAdjacency {
  Var values;
  IndexSet index_set;
};

/// Pair features [N, M, 2d] with row (i, j) = [E_i, E_{I_j}].
Var pair_features(const Var& embedding, const IndexSet& index_set);

/// Multi-head sparse attention: per head, FFN scores of every (node, neighbor) pair are
/// normalized with alpha-entmax along the neighbor axis (separately for both score
/// columns); heads are concatenated, projected to one value, and rectified.
SlimAdjacency compute_slim_adjacency(Tape& tape, Parameter& embedding,
                                     const IndexSet& index_set, AttentionWeights& weights,
                                     entmax::Alpha alpha);

}  // namespace slimcast::graph
