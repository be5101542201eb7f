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

#include "slimcast/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "slimcast/forecaster.hpp"
#include "slimcast/memory.hpp"
#include "slimcast/random.hpp"

namespace slimcast::bench {

Summary summarize(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("summarize: no samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const double median = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  return {samples.front(), median, samples.back()};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope: need at least two points");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
  return sxy / sxx;
}

namespace {

data::ForecastBatch random_batch(const ModelConfig& config, Rng& rng) {
  const std::size_t b = config.batch_size, h = config.history, f = config.horizon,
                    n = config.nodes;
  data::ForecastBatch batch;
  batch.history = Tensor({b, h, n, 1});
  for (double& v : batch.history.data()) v = rng.normal();
  batch.future_covariates = Tensor({b, f, n, 0});
  batch.target = Tensor({b, f, n, 1});
  for (double& v : batch.target.data()) v = rng.normal();
  batch.mask = Tensor({b, f, n}, 1.0);
  batch.last_observed = Tensor({b, n});
  batch.origins.assign(b, 0);
  batch.origin_timestamps.assign(b, 0);
  return batch;
}

}  // namespace

BenchReport run(const BenchOptions& options) {
  if (options.nodes.empty()) throw std::invalid_argument("bench: no node counts");
  if (options.repetitions == 0) throw std::invalid_argument("bench: repetitions must be positive");
  BenchReport report;
  report.dense = options.dense;
  for (std::size_t n : options.nodes) {
    ModelConfig config;
    config.nodes = n;
    config.graph_mode = options.dense ? GraphMode::kDense : GraphMode::kSlim;
    config.neighbors = options.dense ? n : options.neighbors;
    config.top_k = std::max<std::size_t>(1, config.neighbors * 4 / 5);
    config.embedding_dim = options.embedding_dim;
    config.heads = options.heads;
    config.attention_hidden = options.attention_hidden;
    config.hidden = options.hidden;
    config.depth = options.depth;
    config.batch_size = options.batch_size;
    config.history = options.history;
    config.horizon = options.horizon;
    config.alpha = options.alpha;
    config.time_of_day = false;
    config.day_of_week = false;
    config.seed = options.seed;

    std::vector<double> peaks, seconds;
    for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
      TrainState state = make_train_state(config, data::Scaler{});
      Rng rng(derive_seed(options.seed, 1000 + rep));
      const data::ForecastBatch batch = random_batch(config, rng);

      const memory::PeakScope scope;
      const auto start = std::chrono::steady_clock::now();
      train_step(state, batch);
      const auto stop = std::chrono::steady_clock::now();
      peaks.push_back(static_cast<double>(scope.peak_delta()));
      seconds.push_back(std::chrono::duration<double>(stop - start).count());
    }
    report.points.push_back({n, config.neighbors, summarize(peaks), summarize(seconds)});
  }
  if (report.points.size() >= 2) {
    std::vector<double> xs, mem, time;
    for (const BenchPoint& p : report.points) {
      xs.push_back(static_cast<double>(p.nodes));
      mem.push_back(p.peak_bytes.median);
      time.push_back(p.seconds.median);
    }
    report.memory_slope = loglog_slope(xs, mem);
    report.time_slope = loglog_slope(xs, time);
  }
  return report;
}

nlohmann::json to_json(const BenchReport& report) {
  auto summary = [](const Summary& s) {
    return nlohmann::json{{"min", s.min}, {"median", s.median}, {"max", s.max}};
  };
  nlohmann::json points = nlohmann::json::array();
  for (const BenchPoint& p : report.points) {
    points.push_back({{"N", p.nodes},
                      {"M", p.neighbors},
                      {"peak_bytes", summary(p.peak_bytes)},
                      {"seconds", summary(p.seconds)}});
  }
  return {{"mode", report.dense ? "dense" : "slim"},
          {"points", points},
          {"memory_slope", report.memory_slope},
          {"time_slope", report.time_slope}};
}

}  // namespace slimcast::bench
