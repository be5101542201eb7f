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
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slimcast/autodiff.hpp"
#include "slimcast/config.hpp"
#include "slimcast/data.hpp"
#include "slimcast/diffusion.hpp"
#include "slimcast/graph_learning.hpp"

namespace slimcast {

/// All learnable parameters: node embeddings, attention, encoder and decoder cells.
/// The encoder cell has no output projection since its predictions are never read.
class Model {
 public:
  Model() = default;
  /// Random initialization from config.seed.
  explicit Model(const ModelConfig& config);

  ModelConfig config;
  Parameter embedding;  // N x d
  graph::AttentionWeights attention;
  diffusion::GruWeights encoder;
  diffusion::GruWeights decoder;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  /// Adjacency for the configured graph mode, recorded on `tape`.
  graph::SlimAdjacency adjacency(Tape& tape, const graph::IndexSet& index_set);
};

/// Runs the cell over the h-1 history transitions from a zero state; returns H_{t0-1}.
Var encode(Tape& tape, const data::ForecastBatch& batch, const graph::SlimAdjacency& adjacency,
           Model& model);

/// Feeds X_{t0} and then each scaled prediction (with the known future covariates) back
/// through the decoder cell `steps` times. Returns scaled predictions [B, steps, N, C_out].
Var decode(Tape& tape, const Var& hidden, const data::ForecastBatch& batch, std::size_t steps,
           const graph::SlimAdjacency& adjacency, Model& model);

/// encode + decode, mapped back to original units with the scaler.
Var forecast(Tape& tape, const data::ForecastBatch& batch, const graph::SlimAdjacency& adjacency,
             Model& model, const data::Scaler& scaler);

/// Masked mean absolute error sum(mask * |target - pred|) / sum(mask) on the tape.
/// mask [B, f, N] broadcasts over the channel axis of pred/target [B, f, N, C].
/// Throws std::invalid_argument when the mask is empty.
Var mae_loss(const Var& pred, const Tensor& target, const Tensor& mask);
double mae_loss(const Tensor& pred, const Tensor& target, const Tensor& mask);

struct HorizonMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;  // fraction, not percent
};

/// Streaming masked MAE / RMSE / MAPE per forecast step. MAPE skips |target| < 1e-3.
class MetricsAccumulator {
 public:
  static constexpr double kMapeFloor = 1e-3;

  explicit MetricsAccumulator(std::size_t horizon);
  /// pred and target [B, f, N, 1] in original units, mask [B, f, N].
  void add(const Tensor& pred, const Tensor& target, const Tensor& mask);
  /// 1-based horizon.
  HorizonMetrics at(std::size_t horizon) const;
  /// Over all forecast steps.
  HorizonMetrics overall() const;

 private:
  struct Sums {
    double abs = 0.0, sq = 0.0, ape = 0.0, count = 0.0, ape_count = 0.0;
  };
  static HorizonMetrics finish(const Sums& s);
  std::vector<Sums> steps_;
};

struct AdamOptions {
  double learning_rate = 0.003;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam with per-parameter moments keyed by parameter name.
class Adam {
 public:
  struct Moments {
    Tensor first;
    Tensor second;
  };

  explicit Adam(AdamOptions options = {}) : options_(options) {}

  /// Applies one update to every parameter, then resets their gradients.
  void step(std::span<Parameter* const> params);

  double learning_rate() const noexcept { return options_.learning_rate; }
  void set_learning_rate(double lr) noexcept { options_.learning_rate = lr; }
  const AdamOptions& options() const noexcept { return options_; }
  std::size_t steps() const noexcept { return steps_; }
  void set_steps(std::size_t steps) noexcept { steps_ = steps; }
  std::map<std::string, Moments>& moments() noexcept { return moments_; }
  const std::map<std::string, Moments>& moments() const noexcept { return moments_; }

 private:
  AdamOptions options_;
  std::size_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

/// Scales all gradients so their global L2 norm is at most max_norm; returns the norm
/// before scaling.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

/// Raised when a training loss is not finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to continue training or to predict.
struct TrainState {
  ModelConfig config;
  Model model;
  Adam optimizer;
  data::Scaler scaler;
  std::size_t iteration = 0;
  graph::CandidateMatrix candidates;
  graph::IndexSet index_set;

  /// Sampling runs while iteration < this value.
  std::int64_t convergence_iteration = 0;
};

/// Fresh state: random parameters, candidate matrix, and an initial neighbor sample.
TrainState make_train_state(const ModelConfig& config, const data::Scaler& scaler);

/// One iteration: resample neighbors if iteration < r, build the adjacency, forecast,
/// MAE loss, backward, gradient clipping, Adam. Returns the loss.
double train_step(TrainState& state, const data::ForecastBatch& batch);

/// Predictions in original units [B, f, N, 1]; no parameter is modified.
Tensor predict(TrainState& state, const data::ForecastBatch& batch);

/// Current adjacency values (N x M) without recording gradients.
Tensor adjacency_values(TrainState& state);

/// Metrics at the requested 1-based horizons over every window of `windows`.
std::map<std::size_t, HorizonMetrics> evaluate(TrainState& state,
                                               const data::WindowedSeries& windows,
                                               std::span<const std::size_t> horizons);

/// Same harness for the persistence forecast (last observed value at every step).
std::map<std::size_t, HorizonMetrics> evaluate_persistence(const data::WindowedSeries& windows,
                                                           std::span<const std::size_t> horizons);

/// Masked MAE over all horizons.
double validation_mae(TrainState& state, const data::WindowedSeries& windows);

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t iteration = 0;
  double train_loss = 0.0;
  double val_mae = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_mae = 0.0;
  bool stopped_early = false;
};

/// Training loop with shuffled mini-batches, halving the learning rate after
/// config.plateau_epochs epochs without validation improvement and stopping after
/// config.patience. The best-validation parameters and index set are restored at the end.
TrainReport train(TrainState& state, const data::WindowedSeries& train_windows,
                  const data::WindowedSeries& val_windows,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Binary checkpoint: magic, version, FNV-1a checksum, then config, scaler, optimizer
/// state, parameters by name, candidate matrix, and index set.
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
/// Throws data::DataError on any malformed or corrupt file.
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace slimcast
