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

#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "slimcast/bench.hpp"
#include "slimcast/forecaster.hpp"

namespace slimcast::cli {

namespace fs = std::filesystem;

namespace {

/// Raised for configuration problems detected after flag parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model flags shared by train and bench. Unset flags leave the file/default value alone.
struct ModelFlags {
  std::string config_path;
  std::optional<std::size_t> epochs, neighbors, top_k, depth, heads, hidden, horizon, history,
      embedding_dim, batch_size, train_stride, patience;
  std::optional<std::int64_t> convergence_iteration;
  std::optional<double> alpha, learning_rate;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> graph_mode;
  bool dense_mode = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "JSON config with flat keys; flags override it")
        ->check(CLI::ExistingFile);
    cmd.add_option("--epochs", epochs, "Maximum training epochs");
    cmd.add_option("--seed", seed, "Seed for every random draw");
    cmd.add_option("--alpha", alpha, "Entmax alpha in [1, 2.5]");
    cmd.add_option("--M", neighbors, "Significant neighbors per node");
    cmd.add_option("--K", top_k, "Frequency-ranked neighbors kept per sample");
    cmd.add_option("--J", depth, "Diffusion depth");
    cmd.add_option("--heads", heads, "Attention heads");
    cmd.add_option("--hidden", hidden, "GRU hidden width");
    cmd.add_option("--horizon", horizon, "Forecast steps f");
    cmd.add_option("--history", history, "History steps h");
    cmd.add_option("--embedding-dim", embedding_dim, "Node embedding width d");
    cmd.add_option("--batch-size", batch_size, "Mini-batch size");
    cmd.add_option("--lr", learning_rate, "Initial learning rate");
    cmd.add_option("--train-stride", train_stride, "Spacing of training windows");
    cmd.add_option("--patience", patience, "Early-stopping patience in epochs");
    cmd.add_option("--convergence-iteration", convergence_iteration,
                   "Iterations with neighbor sampling (negative: 80% of planned)");
    cmd.add_option("--graph-mode", graph_mode, "slim, dense, or none")
        ->check(CLI::IsMember({"slim", "dense", "none"}));
    cmd.add_flag("--dense-mode", dense_mode, "Full N x N adjacency (M = N)");
  }

  ModelConfig resolve(std::size_t nodes) const {
    ModelConfig c;
    nlohmann::json file = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      try {
        file = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("config " + config_path + ": " + e.what());
      }
    }
    try {
      c = config_from_json(file, c);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config " + config_path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (c.nodes != 0 && c.nodes != nodes) {
      throw data::DataError("config expects " + std::to_string(c.nodes) + " nodes, data has " +
                            std::to_string(nodes));
    }
    c.nodes = nodes;
    if (epochs) c.max_epochs = *epochs;
    if (seed) c.seed = *seed;
    if (alpha) c.alpha = *alpha;
    if (neighbors) c.neighbors = *neighbors;
    if (top_k) c.top_k = *top_k;
    if (depth) c.depth = *depth;
    if (heads) c.heads = *heads;
    if (hidden) c.hidden = *hidden;
    if (horizon) c.horizon = *horizon;
    if (history) c.history = *history;
    if (embedding_dim) c.embedding_dim = *embedding_dim;
    if (batch_size) c.batch_size = *batch_size;
    if (learning_rate) c.learning_rate = *learning_rate;
    if (train_stride) c.train_stride = *train_stride;
    if (patience) c.patience = *patience;
    if (convergence_iteration) c.convergence_iteration = *convergence_iteration;
    if (graph_mode) c.graph_mode = graph_mode_from_string(*graph_mode);
    if (dense_mode) c.graph_mode = GraphMode::kDense;
    if (c.graph_mode == GraphMode::kDense) c.neighbors = nodes;

    // Small datasets: shrink the default neighborhood when neither file nor flag chose one.
    const bool m_chosen = neighbors || file.contains("M");
    const bool k_chosen = top_k || file.contains("K");
    if (c.graph_mode == GraphMode::kSlim && !m_chosen && c.neighbors >= nodes) {
      c.neighbors = std::max<std::size_t>(2, nodes * 3 / 10);
      if (!k_chosen) c.top_k = std::max<std::size_t>(1, c.neighbors * 4 / 5);
    }
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

nlohmann::json metrics_json(const std::map<std::size_t, HorizonMetrics>& metrics) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [h, m] : metrics) {
    doc[std::to_string(h)] = {{"mae", m.mae}, {"rmse", m.rmse}, {"mape", m.mape}};
  }
  return doc;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data::DataError("cannot write " + path.string());
  out << text;
  if (!out) throw data::DataError("failed writing " + path.string());
}

void print_metrics(std::ostream& out, const std::string& label,
                   const std::map<std::size_t, HorizonMetrics>& metrics) {
  for (const auto& [h, m] : metrics) {
    out << label << " horizon " << h << ": MAE " << format_number(m.mae) << "  RMSE "
        << format_number(m.rmse) << "  MAPE " << format_number(100.0 * m.mape) << "%\n";
  }
}

std::vector<std::size_t> resolve_horizons(std::vector<std::size_t> requested, std::size_t f,
                                          bool explicit_request) {
  if (!explicit_request) {
    std::vector<std::size_t> out;
    for (std::size_t h : {3, 6, 12}) {
      if (h <= f) out.push_back(h);
    }
    if (out.empty()) out.push_back(f);
    return out;
  }
  for (std::size_t h : requested) {
    if (h < 1 || h > f) {
      throw UsageError("horizon " + std::to_string(h) + " is outside 1.." + std::to_string(f));
    }
  }
  return requested;
}

data::CovariateOptions covariates_of(const ModelConfig& c) {
  return data::CovariateOptions{c.time_of_day, c.day_of_week};
}

data::WindowSpec spec_of(const ModelConfig& c, std::size_t stride) {
  return data::WindowSpec{c.history, c.horizon, stride};
}

struct SynthArgs {
  std::size_t nodes = 50;
  std::size_t steps = 5000;
  std::size_t hubs = 10;
  std::uint64_t seed = 0;
  std::string out = "synth.csv";
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  data::SyntheticDataset synth;
  try {
    synth = data::synth_generate(a.nodes, a.steps, a.hubs, a.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const fs::path path(a.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  data::write_csv(synth.data, path);
  const fs::path sidecar = path.string() + ".graph.json";
  data::write_synth_sidecar(synth, sidecar);
  out << "wrote " << a.steps << " x " << a.nodes << " series to " << path.string()
      << " (ground truth in " << sidecar.string() << ")\n";
  return kOk;
}

struct TrainArgs {
  ModelFlags model;
  std::string data;
  std::string out = "run";
  std::string checkpoint;
  std::vector<std::size_t> horizons;
};

int cmd_train(const TrainArgs& a, bool horizons_given, std::ostream& out) {
  const data::TimeSeriesDataset dataset = data::load_csv(a.data);
  const ModelConfig config = a.model.resolve(dataset.nodes());
  const std::vector<std::size_t> horizons =
      resolve_horizons(a.horizons, config.horizon, horizons_given);

  const data::Splits splits = data::split(dataset);
  const data::Scaler scaler = data::Scaler::fit(splits.train);
  const auto cov = covariates_of(config);
  const auto train_windows =
      data::make_windows(splits.train, spec_of(config, config.train_stride), scaler, cov);
  const auto val_windows = data::make_windows(splits.val, spec_of(config, 1), scaler, cov);
  const auto test_windows = data::make_windows(splits.test, spec_of(config, 1), scaler, cov);

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  const fs::path checkpoint = a.checkpoint.empty() ? out_dir / "model.ckpt" : fs::path(a.checkpoint);

  TrainState state = make_train_state(config, scaler);
  std::ostringstream log;
  log << "epoch,iter,train_loss,val_mae\n";
  const TrainReport report = train(state, train_windows, val_windows, [&](const EpochRecord& r) {
    log << r.epoch << ',' << r.iteration << ',' << format_number(r.train_loss) << ','
        << format_number(r.val_mae) << '\n';
    out << "epoch " << r.epoch << "  iter " << r.iteration << "  train_loss "
        << format_number(r.train_loss) << "  val_mae " << format_number(r.val_mae) << '\n';
  });
  write_text(out_dir / "train_log.csv", log.str());
  if (checkpoint.has_parent_path()) fs::create_directories(checkpoint.parent_path());
  save_checkpoint(state, checkpoint);

  const auto metrics = evaluate(state, test_windows, horizons);
  write_text(out_dir / "metrics.json", metrics_json(metrics).dump(2) + "\n");
  out << "best epoch " << report.best_epoch << " (val MAE " << format_number(report.best_val_mae)
      << ")" << (report.stopped_early ? ", stopped early" : "") << '\n';
  print_metrics(out, "test", metrics);
  out << "checkpoint " << checkpoint.string() << '\n';
  return kOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string split = "test";
  std::vector<std::size_t> horizons;
};

int cmd_eval(const EvalArgs& a, bool horizons_given, std::ostream& out) {
  TrainState state = load_checkpoint(a.checkpoint);
  const data::TimeSeriesDataset dataset = data::load_csv(a.data);
  if (dataset.nodes() != state.config.nodes) {
    throw data::DataError("checkpoint has " + std::to_string(state.config.nodes) +
                          " nodes, data has " + std::to_string(dataset.nodes()));
  }
  const std::vector<std::size_t> horizons =
      resolve_horizons(a.horizons, state.config.horizon, horizons_given);

  data::TimeSeriesDataset part;
  if (a.split == "all") {
    part = dataset;
  } else {
    const data::Splits splits = data::split(dataset);
    part = a.split == "val" ? splits.val : a.split == "train" ? splits.train : splits.test;
  }
  const auto windows = data::make_windows(part, spec_of(state.config, 1), state.scaler,
                                          covariates_of(state.config));
  const auto metrics = evaluate(state, windows, horizons);
  const auto baseline = evaluate_persistence(windows, horizons);
  print_metrics(out, "model", metrics);
  print_metrics(out, "persistence", baseline);
  if (!a.out.empty()) write_text(a.out, metrics_json(metrics).dump(2) + "\n");
  return kOk;
}

struct PredictArgs {
  std::string checkpoint;
  std::string data;
  std::string out = "forecast.csv";
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  TrainState state = load_checkpoint(a.checkpoint);
  const data::TimeSeriesDataset history = data::load_csv(a.data);
  if (history.nodes() != state.config.nodes) {
    throw data::DataError("checkpoint has " + std::to_string(state.config.nodes) +
                          " nodes, data has " + std::to_string(history.nodes()));
  }
  const data::ForecastBatch batch =
      data::latest_window(history, state.config.history, state.config.horizon, state.scaler,
                          covariates_of(state.config));
  const Tensor pred = predict(state, batch);  // [1, f, N, 1]

  const std::size_t f = state.config.horizon, n = state.config.nodes;
  data::TimeSeriesDataset forecast_ds;
  forecast_ds.node_names = history.node_names;
  forecast_ds.values = Tensor({f, n});
  forecast_ds.mask = Tensor({f, n}, 1.0);
  for (std::size_t k = 0; k < f; ++k) {
    forecast_ds.timestamps.push_back(history.timestamps.back() +
                                     static_cast<std::int64_t>(k + 1) * history.interval());
    for (std::size_t i = 0; i < n; ++i) forecast_ds.values(k, i) = pred[k * n + i];
  }
  const fs::path path(a.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  data::write_csv(forecast_ds, path);
  out << "wrote " << f << " forecast rows to " << path.string() << '\n';
  return kOk;
}

struct BenchArgs {
  std::vector<std::size_t> nodes;
  std::size_t neighbors = 100;
  std::size_t repetitions = 1;
  std::size_t embedding_dim = 16;
  std::size_t heads = 2;
  std::size_t hidden = 16;
  std::uint64_t seed = 0;
  bool dense = false;
  std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  bench::BenchOptions options;
  options.dense = a.dense;
  options.nodes = a.nodes;
  if (options.nodes.empty()) {
    options.nodes = a.dense ? std::vector<std::size_t>{200, 400}
                            : std::vector<std::size_t>{500, 1000, 2000};
  }
  options.neighbors = a.neighbors;
  options.repetitions = a.repetitions;
  options.embedding_dim = a.embedding_dim;
  options.attention_hidden = a.embedding_dim;
  options.heads = a.heads;
  options.hidden = a.hidden;
  options.seed = a.seed;
  if (!a.dense) {
    for (std::size_t n : options.nodes) {
      if (n <= a.neighbors) {
        throw UsageError("bench: every N must exceed M = " + std::to_string(a.neighbors));
      }
    }
  }
  const std::string report = bench::to_json(bench::run(options)).dump(2) + "\n";
  out << report;
  if (!a.out.empty()) write_text(a.out, report);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forecasting on learned slim graphs: synthesize data, train, evaluate, predict, "
               "and benchmark."};
  app.name("slimcast");
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a planted-diffusion dataset");
  synth_cmd->add_option("--nodes", synth.nodes, "Number of series N")->capture_default_str();
  synth_cmd->add_option("--steps", synth.steps, "Number of time steps T")->capture_default_str();
  synth_cmd->add_option("--hubs", synth.hubs, "Planted hub nodes")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output CSV")->capture_default_str();

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train on a CSV dataset");
  train_cmd->add_option("--data", train_args.data, "Input CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_args.out, "Output directory")->capture_default_str();
  train_cmd->add_option("--checkpoint", train_args.checkpoint,
                        "Checkpoint path (default <out>/model.ckpt)");
  CLI::Option* train_horizons =
      train_cmd->add_option("--horizons", train_args.horizons, "Reported horizons (default 3 6 12)");
  train_args.model.add_to(*train_cmd);

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", eval_args.data, "Input CSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_args.out, "Metrics JSON output");
  eval_cmd->add_option("--split", eval_args.split, "Split to score")
      ->check(CLI::IsMember({"train", "val", "test", "all"}))
      ->capture_default_str();
  CLI::Option* eval_horizons =
      eval_cmd->add_option("--horizons", eval_args.horizons, "Horizons (default 3 6 12)");

  PredictArgs predict_args;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Forecast after the last history row");
  predict_cmd->add_option("--checkpoint", predict_args.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", predict_args.data, "History CSV (at least h rows)")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", predict_args.out, "Forecast CSV")->capture_default_str();

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Memory and time scaling benchmark");
  bench_cmd->add_option("--bench-N", bench_args.nodes,
                        "Node counts (default 500 1000 2000, dense 200 400)");
  bench_cmd->add_option("--M", bench_args.neighbors, "Neighbors in slim mode")->capture_default_str();
  bench_cmd->add_option("--repetitions", bench_args.repetitions, "Runs per N")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--embedding-dim", bench_args.embedding_dim, "Node embedding width")
      ->capture_default_str();
  bench_cmd->add_option("--heads", bench_args.heads, "Attention heads")->capture_default_str();
  bench_cmd->add_option("--hidden", bench_args.hidden, "GRU hidden width")->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "Random seed")->capture_default_str();
  bench_cmd->add_flag("--dense-mode", bench_args.dense, "Measure the dense N x N path");
  bench_cmd->add_option("--out", bench_args.out, "Report JSON output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (train_cmd->parsed()) return cmd_train(train_args, train_horizons->count() > 0, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, eval_horizons->count() > 0, out);
    if (predict_cmd->parsed()) return cmd_predict(predict_args, out);
    if (bench_cmd->parsed()) return cmd_bench(bench_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const data::DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace slimcast::cli
