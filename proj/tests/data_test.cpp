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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "slimcast/data.hpp"

using namespace slimcast;
using namespace slimcast::data;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto dir = std::filesystem::temp_directory_path() / "slimcast_data_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << contents;
  return path;
}

TimeSeriesDataset ramp(std::size_t steps, std::size_t nodes, std::int64_t start = 0,
                       std::int64_t interval = 300) {
  TimeSeriesDataset ds;
  ds.values = Tensor({steps, nodes});
  ds.mask = Tensor({steps, nodes}, 1.0);
  for (std::size_t i = 0; i < nodes; ++i) ds.node_names.push_back("n" + std::to_string(i));
  for (std::size_t t = 0; t < steps; ++t) {
    ds.timestamps.push_back(start + static_cast<std::int64_t>(t) * interval);
    for (std::size_t i = 0; i < nodes; ++i) ds.values(t, i) = static_cast<double>(t * 10 + i);
  }
  return ds;
}

}  // namespace

TEST_CASE("csv parsing with missing cells") {
  const auto path = temp_file("missing.csv", "time,a,b\n0,1.5,\n300,2.5,4\n600,,5\n");
  const TimeSeriesDataset ds = load_csv(path);
  CHECK(ds.steps() == 3);
  CHECK(ds.node_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.values(0, 0) == 1.5);
  CHECK(ds.mask(0, 1) == 0.0);
  CHECK(ds.values(0, 1) == 0.0);
  CHECK(ds.mask(1, 1) == 1.0);
  CHECK(ds.mask(2, 0) == 0.0);
  CHECK(ds.interval() == 300);
}

TEST_CASE("csv rejects malformed input") {
  CHECK_THROWS_AS(load_csv(temp_file("shuffled.csv", "time,a\n300,1\n0,2\n")), DataError);
  CHECK_THROWS_AS(load_csv(temp_file("ragged.csv", "time,a,b\n0,1\n")), DataError);
  CHECK_THROWS_AS(load_csv(temp_file("text.csv", "time,a\n0,abc\n")), DataError);
  CHECK_THROWS_AS(load_csv(temp_file("uneven.csv", "time,a\n0,1\n300,2\n900,3\n")), DataError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
  try {
    load_csv(temp_file("line.csv", "time,a\n0,1\n300,x\n"));
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("timestamps parse in both forms") {
  CHECK(parse_timestamp("1704067200") == 1704067200);
  CHECK(parse_timestamp("2024-01-01T00:00:00Z") == 1704067200);
  CHECK(parse_timestamp("2024-01-01 00:05") == 1704067500);
  CHECK_FALSE(parse_timestamp("yesterday").has_value());
  CHECK(parse_timestamp(format_timestamp(1704067500)) == 1704067500);
}

TEST_CASE("csv round trip") {
  TimeSeriesDataset ds = ramp(6, 3, 1704067200);
  ds.values(2, 1) = 1.0 / 3.0;
  ds.values(4, 2) = -2.718281828459045;
  ds.mask(3, 0) = 0.0;
  ds.values(3, 0) = 0.0;
  const auto path = std::filesystem::temp_directory_path() / "slimcast_data_test" / "roundtrip.csv";
  write_csv(ds, path);
  const TimeSeriesDataset back = load_csv(path);
  CHECK(back.timestamps == ds.timestamps);
  CHECK(back.node_names == ds.node_names);
  CHECK(back.mask == ds.mask);
  CHECK(max_abs_diff(back.values, ds.values) <= 1e-12);
}

TEST_CASE("chronological split sizes") {
  const Splits s = split(ramp(100, 2));
  CHECK(s.train.steps() == 70);
  CHECK(s.val.steps() == 10);
  CHECK(s.test.steps() == 20);
  CHECK(s.train.timestamps.back() < s.val.timestamps.front());
  CHECK(s.val.timestamps.back() < s.test.timestamps.front());

  const Splits small = split(ramp(10, 1));
  CHECK(small.train.steps() == 7);
  CHECK(small.val.steps() == 1);
  CHECK(small.test.steps() == 2);
}

TEST_CASE("no timestamp appears in two splits") {
  for (std::size_t t : {10u, 37u, 101u, 500u}) {
    const Splits s = split(ramp(t, 1));
    std::set<std::int64_t> seen;
    for (const auto* part : {&s.train, &s.val, &s.test}) {
      for (std::int64_t ts : part->timestamps) CHECK(seen.insert(ts).second);
    }
    CHECK(seen.size() == t);
  }
}

TEST_CASE("window counts") {
  CHECK(window_count(5, {3, 2, 1}) == 1);
  CHECK(window_count(9, {3, 2, 1}) == 5);
  CHECK(window_count(4, {3, 2, 1}) == 0);
  CHECK(window_count(9, {3, 2, 2}) == 3);
  CHECK_THROWS_AS(make_windows(ramp(4, 1), {3, 2, 1}, Scaler{}, {}), DataError);
}

TEST_CASE("window contents") {
  const TimeSeriesDataset ds = ramp(9, 2, 0);
  const Scaler scaler{5.0, 2.0};
  const WindowedSeries w = make_windows(ds, {3, 2, 1}, scaler, {});
  CHECK(w.size() == 5);
  const ForecastBatch b = w.batch_range(1, 3);
  CHECK(b.history.shape() == Shape{2, 3, 2, 2});
  CHECK(b.future_covariates.shape() == Shape{2, 2, 2, 1});
  CHECK(b.target.shape() == Shape{2, 2, 2, 1});
  // Window 1 covers rows 1..3 as history and rows 4..5 as targets.
  CHECK(b.history(0, 0, 1, 0) == doctest::Approx((11.0 - 5.0) / 2.0));
  CHECK(b.target(0, 0, 0, 0) == 40.0);
  CHECK(b.target(1, 1, 1, 0) == 61.0);
  CHECK(b.last_observed(0, 1) == 31.0);
  CHECK(b.origins == std::vector<std::size_t>{3, 4});
  // Midnight UTC has time of day 0.
  CHECK(b.history(0, 0, 0, 1) == doctest::Approx(300.0 / 86400.0));
  CHECK(time_of_day(0) == 0.0);
  CHECK(time_of_day(1704067200) == 0.0);
  CHECK(time_of_day(43200) == doctest::Approx(0.5));

  std::size_t total = 0;
  for (const auto& batch : w.batches(2)) total += batch.size();
  CHECK(total == 5);
}

TEST_CASE("scaler") {
  TimeSeriesDataset ds = ramp(4, 1);
  ds.mask(3, 0) = 0.0;  // value 30 is ignored
  const Scaler s = Scaler::fit(ds);
  CHECK(s.mean == doctest::Approx(10.0));
  CHECK(s.std == doctest::Approx(std::sqrt(200.0 / 3.0)));
  for (double x : {-3.0, 0.0, 12.5, 1e6}) CHECK(s.inverse(s.transform(x)) == doctest::Approx(x).epsilon(1e-14));
  const Scaler flat = Scaler::fit(ramp(1, 1));
  CHECK(flat.std > 0.0);
}

TEST_CASE("latest window continues the timestamps") {
  const TimeSeriesDataset ds = ramp(10, 2, 1000, 60);
  const ForecastBatch b = latest_window(ds, 4, 3, Scaler{}, {});
  CHECK(b.size() == 1);
  CHECK(b.history(0, 3, 1, 0) == 91.0);
  CHECK(b.origin_timestamps[0] == 1000 + 9 * 60);
  for (double m : b.mask.data()) CHECK(m == 0.0);
  CHECK(b.future_covariates(0, 0, 0, 0) == doctest::Approx(time_of_day(1000 + 10 * 60)));
  CHECK_THROWS_AS(latest_window(ds, 11, 3, Scaler{}, {}), DataError);
}

TEST_CASE("synthetic generator plants the hubs") {
  const SyntheticDataset s = synth_generate(30, 200, 5, 7);
  CHECK(s.hubs.size() == 5);
  CHECK(s.data.steps() == 200);
  CHECK(s.data.nodes() == 30);
  const std::set<std::size_t> hubs(s.hubs.begin(), s.hubs.end());
  for (std::size_t i = 0; i < 30; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 30; ++j) {
      if (s.adjacency(i, j) != 0.0) CHECK(hubs.count(j) == 1);
      CHECK(s.adjacency(i, j) >= 0.0);
      row += s.adjacency(i, j);
    }
    CHECK(row == doctest::Approx(1.0));
  }
  CHECK(s.data.values == synth_generate(30, 200, 5, 7).data.values);
  CHECK(s.data.values.all_finite());
  CHECK_THROWS_AS(synth_generate(5, 10, 5, 0), std::invalid_argument);
}

TEST_CASE("identity coupling without noise or seasonality is constant") {
  const std::size_t n = 6;
  Tensor eye({n, n});
  for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1.0;
  SynthOptions opt;
  opt.adjacency = eye;
  opt.coupling = 1.0;
  opt.noise = 0.0;
  opt.seasonal_amplitude = 0.0;
  opt.initial = std::vector<double>{1, 2, 3, 4, 5, 6};
  const SyntheticDataset s = synth_generate(n, 50, 2, 3, opt);
  for (std::size_t t = 0; t < 50; ++t) {
    for (std::size_t i = 0; i < n; ++i) CHECK(s.data.values(t, i) == static_cast<double>(i + 1));
  }
  // From a zero state the default coupling also stays constant.
  opt.coupling = 0.6;
  opt.initial.reset();
  const SyntheticDataset z = synth_generate(n, 20, 2, 3, opt);
  for (double v : z.data.values.data()) CHECK(v == 0.0);
}

TEST_CASE("persistence is worse than the noise floor") {
  const SyntheticDataset s = synth_generate(20, 2000, 4, 11);
  double persistence = 0.0, oracle = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t + 1 < s.data.steps(); ++t) {
    const auto mean = s.expected_next(t);
    for (std::size_t i = 0; i < 20; ++i) {
      const double next = s.data.values(t + 1, i);
      persistence += std::abs(next - s.data.values(t, i));
      oracle += std::abs(next - mean[i]);
      ++count;
    }
  }
  persistence /= static_cast<double>(count);
  oracle /= static_cast<double>(count);
  // E|noise| for a Gaussian is sigma * sqrt(2 / pi).
  CHECK(oracle == doctest::Approx(s.options.noise * std::sqrt(2.0 / M_PI)).epsilon(0.05));
  CHECK(persistence > oracle);
}
