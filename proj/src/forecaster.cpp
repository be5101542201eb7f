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

#include "slimcast/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "slimcast/init.hpp"
#include "slimcast/ops.hpp"
#include "slimcast/random.hpp"

namespace slimcast {

namespace {

// Seed streams. Every random draw in a run derives from config.seed through one of these.
constexpr std::uint64_t kStreamModel = 1;
constexpr std::uint64_t kStreamCandidates = 2;
constexpr std::uint64_t kStreamSampling = 3;
constexpr std::uint64_t kStreamShuffle = 4;

// [B, T, N, C] -> [B, N, C] at step t.
Tensor time_slice(const Tensor& t4, std::size_t step) {
  const std::size_t b = t4.dim(0), steps = t4.dim(1), n = t4.dim(2), c = t4.dim(3);
  Tensor out({b, n, c});
  const std::size_t block = n * c;
  for (std::size_t i = 0; i < b; ++i) {
    std::copy_n(t4.raw() + (i * steps + step) * block, block, out.raw() + i * block);
  }
  return out;
}

void check_batch(const data::ForecastBatch& batch, const Model& model) {
  const Shape& hs = batch.history.shape();
  const ModelConfig& c = model.config;
  if (hs.size() != 4 || hs[1] != c.history || hs[2] != c.nodes || hs[3] != c.input_channels()) {
    throw std::invalid_argument("batch history " + to_string(hs) + " does not match the model (h=" +
                                std::to_string(c.history) + ", N=" + std::to_string(c.nodes) +
                                ", C_in=" + std::to_string(c.input_channels()) + ")");
  }
  if (hs[0] == 0) throw std::invalid_argument("empty batch");
}

std::uint64_t sampling_seed(const ModelConfig& config, std::size_t iteration) {
  return derive_seed(derive_seed(config.seed, kStreamSampling), iteration);
}

bool sampling_active(const TrainState& state) {
  return state.config.graph_mode == GraphMode::kSlim &&
         (state.convergence_iteration < 0 ||
          static_cast<std::int64_t>(state.iteration) < state.convergence_iteration);
}

graph::SlimAdjacency frozen_adjacency(Tape& tape, TrainState& state) {
  return graph::SlimAdjacency{tape.constant(adjacency_values(state)), state.index_set};
}

Tensor run_forecast(TrainState& state, Tape& tape, const graph::SlimAdjacency& adjacency,
                    const data::ForecastBatch& batch) {
  Tensor out = forecast(tape, batch, adjacency, state.model, state.scaler).value();
  tape.clear();
  return out;
}

}  // namespace

Model::Model(const ModelConfig& cfg) : config(cfg) {
  config.validate();
  Rng rng(derive_seed(config.seed, kStreamModel));
  embedding = Parameter("embedding", init::standard_normal({config.nodes, config.embedding_dim}, rng));
  attention = graph::AttentionWeights(config.embedding_dim, config.heads,
                                      config.effective_attention_hidden(), rng);
  encoder = diffusion::GruWeights("encoder", config.input_channels(), config.hidden, 0,
                                  config.depth, rng);
  decoder = diffusion::GruWeights("decoder", config.input_channels(), config.hidden,
                                  config.output_channels, config.depth, rng);
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out{&embedding};
  for (Parameter* p : attention.parameters()) out.push_back(p);
  for (Parameter* p : encoder.parameters()) out.push_back(p);
  for (Parameter* p : decoder.parameters()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  auto mutable_params = const_cast<Model*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

graph::SlimAdjacency Model::adjacency(Tape& tape, const graph::IndexSet& index_set) {
  switch (config.graph_mode) {
    case GraphMode::kNone:
      return graph::SlimAdjacency{tape.constant(Tensor({config.nodes, 1})),
                                  graph::IndexSet({0}, config.nodes)};
    case GraphMode::kDense:
      if (index_set != graph::IndexSet::identity(config.nodes)) {
        throw std::invalid_argument("dense mode needs the identity index set");
      }
      break;
    case GraphMode::kSlim:
      break;
  }
  return graph::compute_slim_adjacency(tape, embedding, index_set, attention,
                                       entmax::Alpha{config.alpha});
}

Var encode(Tape& tape, const data::ForecastBatch& batch, const graph::SlimAdjacency& adjacency,
           Model& model) {
  check_batch(batch, model);
  const std::size_t b = batch.history.dim(0);
  const std::size_t steps = batch.history.dim(1);
  Var hidden = tape.constant(Tensor({b, model.config.nodes, model.config.hidden}));
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    const Var x = tape.constant(time_slice(batch.history, t));
    hidden = diffusion::one_step_fast_gconv(adjacency, x, hidden, model.encoder).hidden;
  }
  return hidden;
}

Var decode(Tape& tape, const Var& hidden, const data::ForecastBatch& batch, std::size_t steps,
           const graph::SlimAdjacency& adjacency, Model& model) {
  check_batch(batch, model);
  if (steps == 0) throw std::invalid_argument("decode: need at least one step");
  const std::size_t covariates = model.config.input_channels() - 1;
  if (covariates > 0 && steps > 1) {
    const Shape& fs = batch.future_covariates.shape();
    if (fs.size() != 4 || fs[1] + 1 < steps || fs[3] != covariates) {
      throw std::invalid_argument("decode: future covariates " + to_string(fs) + " cover fewer than " +
                                  std::to_string(steps - 1) + " steps");
    }
  }

  Var input = tape.constant(time_slice(batch.history, batch.history.dim(1) - 1));
  Var state = hidden;
  std::vector<Var> predictions;
  predictions.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const diffusion::CellOutput out = diffusion::one_step_fast_gconv(adjacency, input, state, model.decoder);
    state = out.hidden;
    predictions.push_back(out.prediction);
    if (k + 1 == steps) break;
    if (covariates == 0) {
      input = out.prediction;
    } else {
      input = ops::concat({out.prediction, tape.constant(time_slice(batch.future_covariates, k))});
    }
  }
  return ops::stack(predictions, 1);
}

Var forecast(Tape& tape, const data::ForecastBatch& batch, const graph::SlimAdjacency& adjacency,
             Model& model, const data::Scaler& scaler) {
  const Var hidden = encode(tape, batch, adjacency, model);
  const Var scaled = decode(tape, hidden, batch, model.config.horizon, adjacency, model);
  return ops::shift(ops::scale(scaled, scaler.std), scaler.mean);
}

namespace {

void check_loss_shapes(const Shape& pred, const Tensor& target, const Tensor& mask) {
  if (pred != target.shape()) {
    throw std::invalid_argument("mae_loss: prediction " + to_string(pred) + " vs target " +
                                to_string(target.shape()));
  }
  if (pred.empty() || element_count(mask.shape()) * pred.back() != element_count(pred) ||
      !std::equal(mask.shape().begin(), mask.shape().end(), pred.begin())) {
    throw std::invalid_argument("mae_loss: mask " + to_string(mask.shape()) +
                                " does not match prediction " + to_string(pred));
  }
}

}  // namespace

double mae_loss(const Tensor& pred, const Tensor& target, const Tensor& mask) {
  check_loss_shapes(pred.shape(), target, mask);
  const std::size_t channels = pred.shape().back();
  double total = 0.0, weight = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0.0) continue;
    weight += mask[i] * static_cast<double>(channels);
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t k = i * channels + c;
      total += mask[i] * std::abs(target[k] - pred[k]);
    }
  }
  if (weight == 0.0) throw std::invalid_argument("mae_loss: mask selects no targets");
  return total / weight;
}

Var mae_loss(const Var& pred, const Tensor& target, const Tensor& mask) {
  const double value = mae_loss(pred.value(), target, mask);
  const std::size_t channels = pred.shape().back();
  double weight = 0.0;
  for (double m : mask.data()) weight += m;
  weight *= static_cast<double>(channels);

  return pred.tape().record(
      Tensor::scalar(value), {pred},
      [target, mask, channels, weight](const BackwardContext& ctx) {
        if (!ctx.grads[0]) return;
        const Tensor& p = *ctx.inputs[0];
        Tensor& g = *ctx.grads[0];
        const double scale = ctx.grad_output.item() / weight;
        for (std::size_t i = 0; i < mask.size(); ++i) {
          if (mask[i] == 0.0) continue;
          for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t k = i * channels + c;
            const double diff = p[k] - target[k];
            if (diff > 0.0) g[k] += scale * mask[i];
            else if (diff < 0.0) g[k] -= scale * mask[i];
          }
        }
      });
}

MetricsAccumulator::MetricsAccumulator(std::size_t horizon) : steps_(horizon) {}

void MetricsAccumulator::add(const Tensor& pred, const Tensor& target, const Tensor& mask) {
  check_loss_shapes(pred.shape(), target, mask);
  if (pred.rank() != 4 || pred.dim(1) != steps_.size()) {
    throw std::invalid_argument("metrics: expected [B, " + std::to_string(steps_.size()) +
                                ", N, C] predictions, got " + to_string(pred.shape()));
  }
  const std::size_t b = pred.dim(0), f = pred.dim(1), n = pred.dim(2), c = pred.dim(3);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t k = 0; k < f; ++k) {
      Sums& s = steps_[k];
      for (std::size_t j = 0; j < n; ++j) {
        const double m = mask[(i * f + k) * n + j];
        if (m == 0.0) continue;
        for (std::size_t ch = 0; ch < c; ++ch) {
          const std::size_t idx = ((i * f + k) * n + j) * c + ch;
          const double err = std::abs(pred[idx] - target[idx]);
          s.abs += err;
          s.sq += err * err;
          s.count += 1.0;
          if (std::abs(target[idx]) > kMapeFloor) {
            s.ape += err / std::abs(target[idx]);
            s.ape_count += 1.0;
          }
        }
      }
    }
  }
}

HorizonMetrics MetricsAccumulator::finish(const Sums& s) {
  HorizonMetrics m;
  if (s.count > 0.0) {
    m.mae = s.abs / s.count;
    m.rmse = std::sqrt(s.sq / s.count);
  }
  if (s.ape_count > 0.0) m.mape = s.ape / s.ape_count;
  return m;
}

HorizonMetrics MetricsAccumulator::at(std::size_t horizon) const {
  if (horizon < 1 || horizon > steps_.size()) {
    throw std::out_of_range("horizon " + std::to_string(horizon) + " outside 1.." +
                            std::to_string(steps_.size()));
  }
  return finish(steps_[horizon - 1]);
}

HorizonMetrics MetricsAccumulator::overall() const {
  Sums total;
  for (const Sums& s : steps_) {
    total.abs += s.abs;
    total.sq += s.sq;
    total.ape += s.ape;
    total.count += s.count;
    total.ape_count += s.ape_count;
  }
  return finish(total);
}

void Adam::step(std::span<Parameter* const> params) {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  for (Parameter* p : params) {
    auto [it, inserted] = moments_.try_emplace(p->name());
    Moments& m = it->second;
    if (inserted) {
      m.first = Tensor::zeros_like(p->value());
      m.second = Tensor::zeros_like(p->value());
    } else if (m.first.shape() != p->shape() || m.second.shape() != p->shape()) {
      throw std::invalid_argument("adam: moment shape mismatch for " + p->name());
    }
    Tensor& value = p->value();
    const Tensor& grad = p->grad();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m.first[i] = options_.beta1 * m.first[i] + (1.0 - options_.beta1) * g;
      m.second[i] = options_.beta2 * m.second[i] + (1.0 - options_.beta2) * g * g;
      const double m_hat = m.first[i] / c1;
      const double v_hat = m.second[i] / c2;
      value[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
    p->zero_grad();
  }
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    for (double g : p->grad().data()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter* p : params) p->grad() *= factor;
  }
  return norm;
}

TrainState make_train_state(const ModelConfig& config, const data::Scaler& scaler) {
  TrainState state;
  state.config = config;
  state.model = Model(config);
  state.optimizer = Adam(AdamOptions{.learning_rate = config.learning_rate});
  state.scaler = scaler;
  state.convergence_iteration = config.convergence_iteration;
  switch (config.graph_mode) {
    case GraphMode::kSlim:
      state.candidates = graph::init_candidates(config.nodes, config.neighbors,
                                                derive_seed(config.seed, kStreamCandidates));
      state.index_set = graph::sample_significant_neighbors(
          state.model.embedding.value(), state.candidates, config.top_k,
          derive_seed(config.seed, kStreamCandidates + 100));
      break;
    case GraphMode::kDense:
      state.index_set = graph::IndexSet::identity(config.nodes);
      break;
    case GraphMode::kNone:
      state.index_set = graph::IndexSet({0}, config.nodes);
      break;
  }
  return state;
}

double train_step(TrainState& state, const data::ForecastBatch& batch) {
  std::vector<Parameter*> params = state.model.parameters();
  for (Parameter* p : params) p->zero_grad();

  if (sampling_active(state)) {
    state.index_set = graph::sample_significant_neighbors(
        state.model.embedding.value(), state.candidates, state.config.top_k,
        sampling_seed(state.config, state.iteration));
  }

  Tape tape;
  const graph::SlimAdjacency adjacency = state.model.adjacency(tape, state.index_set);
  const Var pred = forecast(tape, batch, adjacency, state.model, state.scaler);
  const Var loss = mae_loss(pred, batch.target, batch.mask);
  const double value = loss.value().item();
  if (!std::isfinite(value)) {
    throw DivergenceError("training diverged at iteration " + std::to_string(state.iteration) +
                          ": loss is " + std::to_string(value) +
                          "; try a lower learning rate or clip norm");
  }
  tape.backward(loss);
  clip_grad_norm(params, state.config.clip_norm);
  state.optimizer.step(params);
  ++state.iteration;
  return value;
}

Tensor adjacency_values(TrainState& state) {
  Tape tape;
  Tensor values = state.model.adjacency(tape, state.index_set).values.value();
  tape.clear();
  return values;
}

Tensor predict(TrainState& state, const data::ForecastBatch& batch) {
  Tape tape;
  return run_forecast(state, tape, frozen_adjacency(tape, state), batch);
}

namespace {

MetricsAccumulator accumulate(TrainState& state, const data::WindowedSeries& windows) {
  MetricsAccumulator acc(state.config.horizon);
  if (windows.size() == 0) return acc;
  Tape tape;
  const Tensor values = adjacency_values(state);
  const std::size_t step = state.config.batch_size;
  for (std::size_t begin = 0; begin < windows.size(); begin += step) {
    const data::ForecastBatch batch =
        windows.batch_range(begin, std::min(windows.size(), begin + step));
    const graph::SlimAdjacency adjacency{tape.constant(values), state.index_set};
    acc.add(run_forecast(state, tape, adjacency, batch), batch.target, batch.mask);
  }
  return acc;
}

std::map<std::size_t, HorizonMetrics> select(const MetricsAccumulator& acc,
                                             std::span<const std::size_t> horizons) {
  std::map<std::size_t, HorizonMetrics> out;
  for (std::size_t h : horizons) out[h] = acc.at(h);
  return out;
}

}  // namespace

std::map<std::size_t, HorizonMetrics> evaluate(TrainState& state,
                                               const data::WindowedSeries& windows,
                                               std::span<const std::size_t> horizons) {
  for (std::size_t h : horizons) {
    if (h < 1 || h > state.config.horizon) {
      throw std::invalid_argument("horizon " + std::to_string(h) + " exceeds the model horizon " +
                                  std::to_string(state.config.horizon));
    }
  }
  return select(accumulate(state, windows), horizons);
}

std::map<std::size_t, HorizonMetrics> evaluate_persistence(const data::WindowedSeries& windows,
                                                           std::span<const std::size_t> horizons) {
  const std::size_t f = windows.spec().horizon;
  MetricsAccumulator acc(f);
  const std::size_t step = 256;
  for (std::size_t begin = 0; begin < windows.size(); begin += step) {
    const data::ForecastBatch batch =
        windows.batch_range(begin, std::min(windows.size(), begin + step));
    const std::size_t b = batch.size(), n = windows.nodes();
    Tensor pred({b, f, n, 1});
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t k = 0; k < f; ++k) {
        for (std::size_t j = 0; j < n; ++j) pred[(i * f + k) * n + j] = batch.last_observed(i, j);
      }
    }
    acc.add(pred, batch.target, batch.mask);
  }
  return select(acc, horizons);
}

double validation_mae(TrainState& state, const data::WindowedSeries& windows) {
  return accumulate(state, windows).overall().mae;
}

namespace {

std::int64_t planned_convergence(const ModelConfig& config, std::size_t train_windows) {
  const std::size_t per_epoch = (train_windows + config.batch_size - 1) / config.batch_size;
  return static_cast<std::int64_t>(0.8 * static_cast<double>(per_epoch * config.max_epochs));
}

struct Snapshot {
  std::vector<Tensor> values;
  graph::IndexSet index_set;
};

Snapshot take_snapshot(TrainState& state) {
  Snapshot s;
  for (const Parameter* p : state.model.parameters()) s.values.push_back(p->value());
  s.index_set = state.index_set;
  return s;
}

void restore(TrainState& state, const Snapshot& s) {
  const auto params = state.model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->assign(s.values[i]);
  state.index_set = s.index_set;
}

}  // namespace

TrainReport train(TrainState& state, const data::WindowedSeries& train_windows,
                  const data::WindowedSeries& val_windows,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  if (train_windows.size() == 0) throw data::DataError("no training windows");
  if (val_windows.size() == 0) throw data::DataError("no validation windows");
  const ModelConfig& config = state.config;
  if (state.convergence_iteration < 0) {
    state.convergence_iteration = planned_convergence(config, train_windows.size());
  }

  TrainReport report;
  report.best_val_mae = std::numeric_limits<double>::infinity();
  Snapshot best = take_snapshot(state);
  std::size_t since_best = 0, since_lr_change = 0;

  std::vector<std::size_t> order(train_windows.size());
  Rng shuffle_rng(derive_seed(config.seed, kStreamShuffle));
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
    }

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const data::ForecastBatch batch =
          train_windows.batch(std::span<const std::size_t>(order.data() + begin, end - begin));
      loss_sum += train_step(state, batch);
      ++batches;
    }

    EpochRecord record{epoch, state.iteration, loss_sum / static_cast<double>(batches),
                       validation_mae(state, val_windows)};
    if (!std::isfinite(record.val_mae)) {
      throw DivergenceError("validation MAE is not finite after epoch " + std::to_string(epoch));
    }
    report.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.val_mae < report.best_val_mae) {
      report.best_val_mae = record.val_mae;
      report.best_epoch = epoch;
      best = take_snapshot(state);
      since_best = 0;
      since_lr_change = 0;
    } else {
      ++since_best;
      if (++since_lr_change >= config.plateau_epochs) {
        state.optimizer.set_learning_rate(state.optimizer.learning_rate() * 0.5);
        since_lr_change = 0;
      }
      if (since_best >= config.patience) {
        report.stopped_early = true;
        break;
      }
    }
  }
  restore(state, best);
  return report;
}

}  // namespace slimcast
