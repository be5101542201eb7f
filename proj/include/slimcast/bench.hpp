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
#include <vector>

#include "json.hpp"

namespace slimcast::bench {

/// One forward/backward training step at each N, measured with the allocation counters.
struct BenchOptions {
  std::vector<std::size_t> nodes{500, 1000, 2000};
  std::size_t neighbors = 100;  // M in slim mode; ignored in dense mode (M = N)
  bool dense = false;
  std::size_t embedding_dim = 16;
  std::size_t heads = 2;
  std::size_t attention_hidden = 16;
  std::size_t hidden = 16;
  std::size_t depth = 2;
  std::size_t batch_size = 1;
  std::size_t history = 2;
  std::size_t horizon = 1;
  double alpha = 2.0;
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
};

struct Summary {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

Summary summarize(std::vector<double> samples);

struct BenchPoint {
  std::size_t nodes = 0;
  std::size_t neighbors = 0;
  Summary peak_bytes;
  Summary seconds;
};

struct BenchReport {
  bool dense = false;
  std::vector<BenchPoint> points;
  double memory_slope = 0.0;  // least-squares slope of log(median peak bytes) on log N
  double time_slope = 0.0;
};

/// Ordinary least-squares slope of log(y) against log(x). Needs two or more distinct x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

BenchReport run(const BenchOptions& options);

nlohmann::json to_json(const BenchReport& report);

}  // namespace slimcast::bench
