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
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slimcast/tensor.hpp"

namespace slimcast::data {

/// Malformed input data or artifact on disk.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// T x N observations at a fixed interval. Missing values have mask 0 and value 0.
struct TimeSeriesDataset {
  std::vector<std::int64_t> timestamps;  // epoch seconds
  Tensor values;                         // [T, N]
  Tensor mask;                           // [T, N]
  std::vector<std::string> node_names;

  std::size_t steps() const noexcept { return timestamps.size(); }
  std::size_t nodes() const noexcept { return node_names.size(); }
  /// Spacing in seconds, 0 for a single-step dataset.
  std::int64_t interval() const noexcept;
  /// Rows [begin, end).
  TimeSeriesDataset slice(std::size_t begin, std::size_t end) const;
};

/// Header row, then one row per step: timestamp (epoch seconds or ISO-8601), one column per
/// node. Empty cells are missing. Throws DataError naming the offending line.
TimeSeriesDataset load_csv(const std::filesystem::path& path);
void write_csv(const TimeSeriesDataset& dataset, const std::filesystem::path& path);

/// Parses epoch seconds or YYYY-MM-DD[T ]HH:MM[:SS][Z] (UTC).
std::optional<std::int64_t> parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t epoch_seconds);

/// Chronological contiguous split: floor(0.7 T) / floor(0.1 T) / remainder.
struct Splits {
  TimeSeriesDataset train;
  TimeSeriesDataset val;
  TimeSeriesDataset test;
};
Splits split(const TimeSeriesDataset& dataset);

/// Standardization of the observed values of a split.
struct Scaler {
  double mean = 0.0;
  double std = 1.0;

  static Scaler fit(const TimeSeriesDataset& train);
  double transform(double x) const noexcept { return (x - mean) / std; }
  double inverse(double z) const noexcept { return z * std + mean; }
};

struct WindowSpec {
  std::size_t history = 12;
  std::size_t horizon = 12;
  std::size_t stride = 1;
};

struct CovariateOptions {
  bool time_of_day = true;
  bool day_of_week = false;
  std::size_t count() const noexcept {
    return static_cast<std::size_t>(time_of_day) + static_cast<std::size_t>(day_of_week);
  }
};

/// Fraction of the UTC day elapsed, in [0, 1).
double time_of_day(std::int64_t epoch_seconds) noexcept;
/// Monday = 0 ... Sunday = 6/7, in [0, 1).
double day_of_week(std::int64_t epoch_seconds) noexcept;

/// floor((length - history - horizon) / stride) + 1, or 0 when too short.
std::size_t window_count(std::size_t length, const WindowSpec& spec) noexcept;

/// A batch of forecasting windows. Inputs are scaled; targets are in original units.
struct ForecastBatch {
  Tensor history;            // [B, h, N, 1 + covariates]
  Tensor future_covariates;  // [B, f, N, covariates], steps t0+1 .. t0+f
  Tensor target;             // [B, f, N, 1]
  Tensor mask;               // [B, f, N]
  Tensor last_observed;      // [B, N], original units at t0
  std::vector<std::size_t> origins;  // index of t0 within the split
  std::vector<std::int64_t> origin_timestamps;

  std::size_t size() const noexcept { return origins.size(); }
};

/// Sliding windows over one split, materialized into batches on demand.
class WindowedSeries {
 public:
  WindowedSeries(TimeSeriesDataset split, WindowSpec spec, Scaler scaler,
                 CovariateOptions covariates);

  std::size_t size() const noexcept { return count_; }
  const WindowSpec& spec() const noexcept { return spec_; }
  const Scaler& scaler() const noexcept { return scaler_; }
  const CovariateOptions& covariates() const noexcept { return covariates_; }
  const TimeSeriesDataset& series() const noexcept { return series_; }
  std::size_t nodes() const noexcept { return series_.nodes(); }

  /// First history row of window w.
  std::size_t start(std::size_t window) const noexcept { return window * spec_.stride; }

  ForecastBatch batch(std::span<const std::size_t> windows) const;
  /// Windows [begin, end).
  ForecastBatch batch_range(std::size_t begin, std::size_t end) const;
  /// Consecutive batches of at most batch_size windows.
  std::vector<ForecastBatch> batches(std::size_t batch_size) const;

 private:
  TimeSeriesDataset series_;
  WindowSpec spec_;
  Scaler scaler_;
  CovariateOptions covariates_;
  std::size_t count_ = 0;
};

/// Rejects a split shorter than history + horizon.
WindowedSeries make_windows(const TimeSeriesDataset& split, const WindowSpec& spec,
                            const Scaler& scaler, const CovariateOptions& covariates);

/// Window whose history is the last `history` rows of `dataset`, with `horizon` future
/// steps continuing at the dataset interval. Targets are unknown (mask 0). Throws
/// DataError when the dataset is shorter than `history`.
ForecastBatch latest_window(const TimeSeriesDataset& dataset, std::size_t history,
                            std::size_t horizon, const Scaler& scaler,
                            const CovariateOptions& covariates);

struct SynthOptions {
  double coupling = 0.6;
  double seasonal_amplitude = 0.3;
  double noise = 0.05;
  /// Each hub carries its own sinusoid with a period drawn from this range (in steps).
  double min_period = 8.0;
  double max_period = 40.0;
  /// Hubs feeding each row, drawn uniformly from [1, max_parents].
  std::size_t max_parents = 3;
  std::int64_t start = 1704067200;  // 2024-01-01T00:00:00Z
  std::int64_t interval = 300;
  /// Replaces the random hub adjacency (N x N) when set.
  std::optional<Tensor> adjacency;
  /// Initial state; zeros when unset.
  std::optional<std::vector<double>> initial;
};

/// Planted-diffusion series x_{t+1} = c A x_t + a s(t) + noise, with A nonnegative,
/// row-normalized, and nonzero only in the columns of the hub nodes. s(t) is a per-hub
/// sinusoid and zero elsewhere.
struct SyntheticDataset {
  TimeSeriesDataset data;
  Tensor adjacency;  // [N, N]
  std::vector<std::size_t> hubs;
  std::vector<double> periods;  // per hub
  std::vector<double> phases;   // per hub
  SynthOptions options;

  /// Noise-free one-step mean of x_{t+1} given x_t.
  std::vector<double> expected_next(std::size_t t) const;
};

SyntheticDataset synth_generate(std::size_t nodes, std::size_t steps, std::size_t hub_count,
                                std::uint64_t seed, SynthOptions options = {});

/// JSON sidecar with the ground-truth adjacency and hub set.
void write_synth_sidecar(const SyntheticDataset& synth, const std::filesystem::path& path);

}  // namespace slimcast::data
