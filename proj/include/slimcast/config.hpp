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
#include <string>

#include "json.hpp"

namespace slimcast {

/// How the adjacency fed to the diffusion cells is produced.
enum class GraphMode {
  kSlim,   // sampled significant neighbors, N x M
  kDense,  // every node is a neighbor, N x N
  kNone,   // zero adjacency (no spatial mixing)
};

std::string to_string(GraphMode mode);
GraphMode graph_mode_from_string(const std::string& name);

/// Model, optimization, and windowing settings. Defaults are the full-scale values; desk
/// experiments shrink nodes, embedding_dim, neighbors, and top_k together.
struct ModelConfig {
  std::size_t nodes = 0;
  std::size_t neighbors = 100;   // M
  std::size_t top_k = 80;        // K
  std::size_t embedding_dim = 100;
  std::size_t hidden = 64;
  std::size_t heads = 8;
  std::size_t attention_hidden = 0;  // 0 means 2 * embedding_dim
  std::size_t depth = 3;             // J
  std::size_t history = 12;          // h
  std::size_t horizon = 12;          // f
  std::size_t output_channels = 1;
  double alpha = 2.0;
  /// Iterations during which neighbor sampling runs; negative means 80% of planned iterations.
  std::int64_t convergence_iteration = -1;
  std::size_t batch_size = 64;
  double learning_rate = 0.003;
  std::size_t max_epochs = 100;
  std::size_t patience = 15;
  std::size_t plateau_epochs = 5;
  double clip_norm = 5.0;
  std::size_t train_stride = 1;
  bool time_of_day = true;
  bool day_of_week = false;
  GraphMode graph_mode = GraphMode::kSlim;
  std::uint64_t seed = 0;

  std::size_t input_channels() const noexcept {
    return 1 + static_cast<std::size_t>(time_of_day) + static_cast<std::size_t>(day_of_week);
  }
  std::size_t effective_attention_hidden() const noexcept {
    return attention_hidden ? attention_hidden : 2 * embedding_dim;
  }
  /// Width of the adjacency (M) under the graph mode.
  std::size_t adjacency_width() const noexcept;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
/// Applies the keys present in `doc` on top of `base`; unknown keys are rejected.
ModelConfig config_from_json(const nlohmann::json& doc, ModelConfig base = {});

}  // namespace slimcast
