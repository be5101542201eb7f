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

#include "slimcast/config.hpp"

#include <stdexcept>

#include "slimcast/entmax.hpp"

namespace slimcast {

std::string to_string(GraphMode mode) {
  switch (mode) {
    case GraphMode::kSlim:
      return "slim";
    case GraphMode::kDense:
      return "dense";
    case GraphMode::kNone:
      return "none";
  }
  return "slim";
}

GraphMode graph_mode_from_string(const std::string& name) {
  if (name == "slim") return GraphMode::kSlim;
  if (name == "dense") return GraphMode::kDense;
  if (name == "none") return GraphMode::kNone;
  throw std::invalid_argument("unknown graph mode '" + name + "' (slim, dense, none)");
}

std::size_t ModelConfig::adjacency_width() const noexcept {
  switch (graph_mode) {
    case GraphMode::kSlim:
      return neighbors;
    case GraphMode::kDense:
      return nodes;
    case GraphMode::kNone:
      return 1;
  }
  return neighbors;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (nodes < 2) fail("need at least 2 nodes");
  if (graph_mode == GraphMode::kSlim) {
    if (neighbors >= nodes) fail("slim mode needs M < N (use dense mode for M = N)");
    if (top_k >= neighbors) fail("need K < M");
  }
  if (embedding_dim == 0 || hidden == 0 || heads == 0) fail("widths must be positive");
  if (depth < 1) fail("need J >= 1");
  if (history < 2) fail("need history h >= 2");
  if (horizon < 1) fail("need horizon f >= 1");
  if (output_channels != 1) fail("only one output channel is supported");
  if (batch_size == 0) fail("batch size must be positive");
  if (train_stride == 0) fail("train stride must be positive");
  if (!(learning_rate > 0.0)) fail("learning rate must be positive");
  if (!(clip_norm > 0.0)) fail("clip norm must be positive");
  entmax::Alpha{alpha};
}

nlohmann::json to_json(const ModelConfig& c) {
  return nlohmann::json{
      {"nodes", c.nodes},
      {"M", c.neighbors},
      {"K", c.top_k},
      {"embedding_dim", c.embedding_dim},
      {"hidden", c.hidden},
      {"heads", c.heads},
      {"attention_hidden", c.attention_hidden},
      {"J", c.depth},
      {"history", c.history},
      {"horizon", c.horizon},
      {"output_channels", c.output_channels},
      {"alpha", c.alpha},
      {"convergence_iteration", c.convergence_iteration},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"epochs", c.max_epochs},
      {"patience", c.patience},
      {"plateau_epochs", c.plateau_epochs},
      {"clip_norm", c.clip_norm},
      {"train_stride", c.train_stride},
      {"time_of_day", c.time_of_day},
      {"day_of_week", c.day_of_week},
      {"graph_mode", to_string(c.graph_mode)},
      {"seed", c.seed},
  };
}

ModelConfig config_from_json(const nlohmann::json& doc, ModelConfig c) {
  if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "nodes") c.nodes = value.get<std::size_t>();
    else if (key == "M") c.neighbors = value.get<std::size_t>();
    else if (key == "K") c.top_k = value.get<std::size_t>();
    else if (key == "embedding_dim") c.embedding_dim = value.get<std::size_t>();
    else if (key == "hidden") c.hidden = value.get<std::size_t>();
    else if (key == "heads") c.heads = value.get<std::size_t>();
    else if (key == "attention_hidden") c.attention_hidden = value.get<std::size_t>();
    else if (key == "J") c.depth = value.get<std::size_t>();
    else if (key == "history") c.history = value.get<std::size_t>();
    else if (key == "horizon") c.horizon = value.get<std::size_t>();
    else if (key == "output_channels") c.output_channels = value.get<std::size_t>();
    else if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "convergence_iteration") c.convergence_iteration = value.get<std::int64_t>();
    else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
    else if (key == "learning_rate") c.learning_rate = value.get<double>();
    else if (key == "epochs") c.max_epochs = value.get<std::size_t>();
    else if (key == "patience") c.patience = value.get<std::size_t>();
    else if (key == "plateau_epochs") c.plateau_epochs = value.get<std::size_t>();
    else if (key == "clip_norm") c.clip_norm = value.get<double>();
    else if (key == "train_stride") c.train_stride = value.get<std::size_t>();
    else if (key == "time_of_day") c.time_of_day = value.get<bool>();
    else if (key == "day_of_week") c.day_of_week = value.get<bool>();
    else if (key == "graph_mode") c.graph_mode = graph_mode_from_string(value.get<std::string>());
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return c;
}

}  // namespace slimcast
