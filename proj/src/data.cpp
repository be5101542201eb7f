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

#include "slimcast/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "slimcast/random.hpp"

namespace slimcast::data {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    out.push_back(trim(line.substr(begin, comma == std::string_view::npos ? comma : comma - begin)));
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return out;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  const std::int64_t r = a % b;
  return r < 0 ? r + b : r;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::int64_t TimeSeriesDataset::interval() const noexcept {
  return timestamps.size() < 2 ? 0 : timestamps[1] - timestamps[0];
}

TimeSeriesDataset TimeSeriesDataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > steps()) {
    throw std::out_of_range("TimeSeriesDataset::slice: [" + std::to_string(begin) + ", " +
                            std::to_string(end) + ") of " + std::to_string(steps()));
  }
  const std::size_t n = nodes();
  TimeSeriesDataset out;
  out.node_names = node_names;
  out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                        timestamps.begin() + static_cast<std::ptrdiff_t>(end));
  out.values = Tensor({end - begin, n},
                      values.data().subspan(begin * n, (end - begin) * n));
  out.mask = Tensor({end - begin, n}, mask.data().subspan(begin * n, (end - begin) * n));
  return out;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::int64_t epoch = 0;
  if (parse_int(text, epoch)) return epoch;

  // YYYY-MM-DD[T ]HH:MM[:SS][Z]
  if (text.back() == 'Z') text.remove_suffix(1);
  if (text.size() != 16 && text.size() != 19) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || (text.size() == 19 && text[16] != ':')) {
    return std::nullopt;
  }
  std::int64_t year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), month) ||
      !parse_int(text.substr(8, 2), day) || !parse_int(text.substr(11, 2), hour) ||
      !parse_int(text.substr(14, 2), minute) ||
      (text.size() == 19 && !parse_int(text.substr(17, 2), second))) {
    return std::nullopt;
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
      second > 60) {
    return std::nullopt;
  }
  return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) *
             kSecondsPerDay +
         hour * 3600 + minute * 60 + second;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  const std::int64_t days = (epoch_seconds - floor_mod(epoch_seconds, kSecondsPerDay)) /
                            kSecondsPerDay;
  const std::int64_t secs = floor_mod(epoch_seconds, kSecondsPerDay);
  std::int64_t y = 0;
  unsigned m = 0, d = 0;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d, static_cast<long long>(secs / 3600),
                static_cast<long long>((secs / 60) % 60), static_cast<long long>(secs % 60));
  return buf;
}

TimeSeriesDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string where = path.string() + ":";

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(where + "1: missing header row");
  ++line_no;
  const std::vector<std::string_view> header = split_fields(line);
  if (header.size() < 2) throw DataError(where + "1: header names no node columns");

  TimeSeriesDataset ds;
  for (std::size_t c = 1; c < header.size(); ++c) ds.node_names.emplace_back(header[c]);
  const std::size_t n = ds.node_names.size();
  std::vector<double> values;
  std::vector<double> mask;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> fields = split_fields(line);
    const std::string at = where + std::to_string(line_no) + ": ";
    if (fields.size() != n + 1) {
      throw DataError(at + "expected " + std::to_string(n + 1) + " fields, found " +
                      std::to_string(fields.size()));
    }
    const std::optional<std::int64_t> ts = parse_timestamp(fields[0]);
    if (!ts) throw DataError(at + "unparseable timestamp '" + std::string(fields[0]) + "'");
    if (!ds.timestamps.empty()) {
      if (*ts <= ds.timestamps.back()) throw DataError(at + "timestamps not increasing");
      if (ds.timestamps.size() >= 2 && *ts - ds.timestamps.back() != ds.interval()) {
        throw DataError(at + "irregular time spacing");
      }
    }
    ds.timestamps.push_back(*ts);
    for (std::size_t c = 1; c <= n; ++c) {
      const std::string_view cell = fields[c];
      if (cell.empty() || cell == "nan" || cell == "NaN" || cell == "NA") {
        values.push_back(0.0);
        mask.push_back(0.0);
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw DataError(at + "bad value '" + std::string(cell) + "' in column " +
                        std::to_string(c));
      }
      values.push_back(v);
      mask.push_back(1.0);
    }
  }
  if (ds.timestamps.empty()) throw DataError(where + " no data rows");
  const std::size_t t = ds.timestamps.size();
  ds.values = Tensor({t, n}, values);
  ds.mask = Tensor({t, n}, mask);
  return ds;
}

void write_csv(const TimeSeriesDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "timestamp";
  for (const std::string& name : dataset.node_names) out << ',' << name;
  out << '\n';
  const std::size_t n = dataset.nodes();
  for (std::size_t t = 0; t < dataset.steps(); ++t) {
    out << format_timestamp(dataset.timestamps[t]);
    for (std::size_t i = 0; i < n; ++i) {
      out << ',';
      if (dataset.mask(t, i) != 0.0) out << format_double(dataset.values(t, i));
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Splits split(const TimeSeriesDataset& dataset) {
  const std::size_t t = dataset.steps();
  if (t < 10) throw DataError("split: need at least 10 steps, got " + std::to_string(t));
  const std::size_t train_end = t * 7 / 10;
  const std::size_t val_end = train_end + t / 10;
  return Splits{dataset.slice(0, train_end), dataset.slice(train_end, val_end),
                dataset.slice(val_end, t)};
}

Scaler Scaler::fit(const TimeSeriesDataset& train) {
  double total = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < train.values.size(); ++i) {
    total += train.mask[i] * train.values[i];
    count += train.mask[i];
  }
  Scaler s;
  if (count == 0.0) return s;
  s.mean = total / count;
  double sq = 0.0;
  for (std::size_t i = 0; i < train.values.size(); ++i) {
    const double d = train.values[i] - s.mean;
    sq += train.mask[i] * d * d;
  }
  const double std = std::sqrt(sq / count);
  s.std = std > 0.0 ? std : 1.0;
  return s;
}

double time_of_day(std::int64_t epoch_seconds) noexcept {
  return static_cast<double>(floor_mod(epoch_seconds, kSecondsPerDay)) / kSecondsPerDay;
}

double day_of_week(std::int64_t epoch_seconds) noexcept {
  const std::int64_t days = (epoch_seconds - floor_mod(epoch_seconds, kSecondsPerDay)) /
                            kSecondsPerDay;
  // 1970-01-01 was a Thursday (Monday = 0).
  return static_cast<double>(floor_mod(days + 3, 7)) / 7.0;
}

std::size_t window_count(std::size_t length, const WindowSpec& spec) noexcept {
  const std::size_t span = spec.history + spec.horizon;
  if (length < span || spec.stride == 0) return 0;
  return (length - span) / spec.stride + 1;
}

WindowedSeries::WindowedSeries(TimeSeriesDataset split, WindowSpec spec, Scaler scaler,
                               CovariateOptions covariates)
    : series_(std::move(split)), spec_(spec), scaler_(scaler), covariates_(covariates) {
  if (spec_.history < 2 || spec_.horizon < 1 || spec_.stride < 1) {
    throw std::invalid_argument("WindowSpec: need history >= 2, horizon >= 1, stride >= 1");
  }
  if (series_.steps() < spec_.history + spec_.horizon) {
    throw DataError("split of " + std::to_string(series_.steps()) +
                    " steps is shorter than history + horizon = " +
                    std::to_string(spec_.history + spec_.horizon));
  }
  count_ = window_count(series_.steps(), spec_);
}

ForecastBatch WindowedSeries::batch(std::span<const std::size_t> windows) const {
  const std::size_t b = windows.size();
  const std::size_t h = spec_.history;
  const std::size_t f = spec_.horizon;
  const std::size_t n = series_.nodes();
  const std::size_t cov = covariates_.count();
  const std::size_t cin = 1 + cov;

  ForecastBatch out;
  out.history = Tensor({b, h, n, cin});
  out.future_covariates = Tensor({b, f, n, cov});
  out.target = Tensor({b, f, n, 1});
  out.mask = Tensor({b, f, n});
  out.last_observed = Tensor({b, n});

  auto covariate_row = [&](std::size_t t, double* dst) {
    const std::int64_t ts = series_.timestamps[t];
    std::size_t k = 0;
    if (covariates_.time_of_day) dst[k++] = time_of_day(ts);
    if (covariates_.day_of_week) dst[k++] = day_of_week(ts);
  };

  for (std::size_t w = 0; w < b; ++w) {
    if (windows[w] >= count_) {
      throw std::out_of_range("WindowedSeries::batch: window " + std::to_string(windows[w]) +
                              " of " + std::to_string(count_));
    }
    const std::size_t s = start(windows[w]);
    const std::size_t origin = s + h - 1;
    out.origins.push_back(origin);
    out.origin_timestamps.push_back(series_.timestamps[origin]);
    for (std::size_t k = 0; k < h; ++k) {
      const std::size_t t = s + k;
      for (std::size_t i = 0; i < n; ++i) {
        double* dst = out.history.raw() + ((w * h + k) * n + i) * cin;
        dst[0] = series_.mask(t, i) != 0.0 ? scaler_.transform(series_.values(t, i)) : 0.0;
        covariate_row(t, dst + 1);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.last_observed(w, i) = series_.values(origin, i);
    }
    for (std::size_t k = 0; k < f; ++k) {
      const std::size_t t = origin + 1 + k;
      for (std::size_t i = 0; i < n; ++i) {
        out.target[(w * f + k) * n + i] = series_.values(t, i);
        out.mask[(w * f + k) * n + i] = series_.mask(t, i);
        covariate_row(t, out.future_covariates.raw() + ((w * f + k) * n + i) * cov);
      }
    }
  }
  return out;
}

ForecastBatch WindowedSeries::batch_range(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> ids;
  for (std::size_t w = begin; w < end; ++w) ids.push_back(w);
  return batch(ids);
}

std::vector<ForecastBatch> WindowedSeries::batches(std::size_t batch_size) const {
  if (batch_size == 0) throw std::invalid_argument("batches: batch size must be positive");
  std::vector<ForecastBatch> out;
  for (std::size_t begin = 0; begin < count_; begin += batch_size) {
    out.push_back(batch_range(begin, std::min(count_, begin + batch_size)));
  }
  return out;
}

WindowedSeries make_windows(const TimeSeriesDataset& split, const WindowSpec& spec,
                            const Scaler& scaler, const CovariateOptions& covariates) {
  return WindowedSeries(split, spec, scaler, covariates);
}

ForecastBatch latest_window(const TimeSeriesDataset& dataset, std::size_t history,
                            std::size_t horizon, const Scaler& scaler,
                            const CovariateOptions& covariates) {
  const std::size_t t = dataset.steps();
  if (t < history) {
    throw DataError("history has " + std::to_string(t) + " rows, the model needs " +
                    std::to_string(history));
  }
  const std::int64_t interval = dataset.interval();
  if (interval <= 0) throw DataError("cannot infer the sampling interval of the history");
  TimeSeriesDataset extended = dataset.slice(t - history, t);
  const std::size_t n = dataset.nodes();
  Tensor values({history + horizon, n});
  Tensor mask({history + horizon, n});
  std::copy_n(extended.values.raw(), history * n, values.raw());
  std::copy_n(extended.mask.raw(), history * n, mask.raw());
  for (std::size_t k = 1; k <= horizon; ++k) {
    extended.timestamps.push_back(extended.timestamps.back() + interval);
  }
  extended.values = std::move(values);
  extended.mask = std::move(mask);
  const WindowedSeries windows(std::move(extended), WindowSpec{history, horizon, 1}, scaler,
                               covariates);
  return windows.batch_range(0, 1);
}

std::vector<double> SyntheticDataset::expected_next(std::size_t t) const {
  const std::size_t n = data.nodes();
  std::vector<double> next(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += adjacency(i, j) * data.values(t, j);
    next[i] = options.coupling * acc;
  }
  for (std::size_t k = 0; k < hubs.size(); ++k) {
    next[hubs[k]] += options.seasonal_amplitude *
                     std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / periods[k] +
                              phases[k]);
  }
  return next;
}

SyntheticDataset synth_generate(std::size_t nodes, std::size_t steps, std::size_t hub_count,
                                std::uint64_t seed, SynthOptions options) {
  if (hub_count == 0 || hub_count >= nodes) {
    throw std::invalid_argument("synth_generate: need 0 < hubs < N, got " +
                                std::to_string(hub_count) + " of " + std::to_string(nodes));
  }
  Rng rng(seed);
  SyntheticDataset out;

  std::vector<std::size_t> pool(nodes);
  for (std::size_t i = 0; i < nodes; ++i) pool[i] = i;
  for (std::size_t k = 0; k < hub_count; ++k) {
    std::swap(pool[k], pool[k + rng.uniform_index(nodes - k)]);
  }
  out.hubs.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(hub_count));
  std::sort(out.hubs.begin(), out.hubs.end());

  if (options.adjacency) {
    if (options.adjacency->shape() != Shape{nodes, nodes}) {
      throw std::invalid_argument("synth_generate: adjacency override must be N x N");
    }
    out.adjacency = *options.adjacency;
  } else {
    out.adjacency = Tensor({nodes, nodes});
    for (std::size_t i = 0; i < nodes; ++i) {
      std::vector<std::size_t> parents;
      for (std::size_t h : out.hubs) {
        if (h != i) parents.push_back(h);
      }
      if (parents.empty()) continue;
      const std::size_t want =
          1 + rng.uniform_index(std::min(options.max_parents, parents.size()));
      double total = 0.0;
      for (std::size_t k = 0; k < want; ++k) {
        std::swap(parents[k], parents[k + rng.uniform_index(parents.size() - k)]);
        const double w = rng.uniform(0.2, 1.0);
        out.adjacency(i, parents[k]) = w;
        total += w;
      }
      for (std::size_t k = 0; k < want; ++k) out.adjacency(i, parents[k]) /= total;
    }
  }
  for (std::size_t k = 0; k < hub_count; ++k) {
    out.periods.push_back(rng.uniform(options.min_period, options.max_period));
    out.phases.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
  }

  TimeSeriesDataset& ds = out.data;
  for (std::size_t i = 0; i < nodes; ++i) ds.node_names.push_back("node" + std::to_string(i));
  ds.values = Tensor({steps, nodes});
  ds.mask = Tensor({steps, nodes}, 1.0);
  for (std::size_t t = 0; t < steps; ++t) {
    ds.timestamps.push_back(options.start + static_cast<std::int64_t>(t) * options.interval);
  }
  if (options.initial) {
    if (options.initial->size() != nodes) {
      throw std::invalid_argument("synth_generate: initial state must have N entries");
    }
    for (std::size_t i = 0; i < nodes; ++i) ds.values(0, i) = (*options.initial)[i];
  }
  out.options = std::move(options);
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    const std::vector<double> mean = out.expected_next(t);
    for (std::size_t i = 0; i < nodes; ++i) {
      ds.values(t + 1, i) = mean[i] + out.options.noise * rng.normal();
    }
  }
  return out;
}

void write_synth_sidecar(const SyntheticDataset& synth, const std::filesystem::path& path) {
  const std::size_t n = synth.data.nodes();
  nlohmann::json doc;
  doc["nodes"] = n;
  doc["steps"] = synth.data.steps();
  doc["hubs"] = synth.hubs;
  doc["periods"] = synth.periods;
  doc["phases"] = synth.phases;
  doc["coupling"] = synth.options.coupling;
  doc["seasonal_amplitude"] = synth.options.seasonal_amplitude;
  doc["noise"] = synth.options.noise;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(std::vector<double>(synth.adjacency.data().begin() + static_cast<std::ptrdiff_t>(i * n),
                                       synth.adjacency.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
  }
  doc["adjacency"] = std::move(rows);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace slimcast::data
