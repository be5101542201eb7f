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

// Acceptance harness. Prints one PASS/FAIL line per criterion and exits non-zero when any
// criterion fails. Usage: acceptance [criterion ...] [--work DIR]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "oracles/dense_reference.hpp"
#include "oracles/oracles.hpp"
#include "slimcast/bench.hpp"
#include "slimcast/diffusion.hpp"
#include "slimcast/entmax.hpp"
#include "slimcast/forecaster.hpp"
#include "slimcast/graph_learning.hpp"
#include "slimcast/ops.hpp"

namespace fs = std::filesystem;
using namespace slimcast;
using graph::IndexSet;
using graph::SlimAdjacency;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1 ---------------------------------------------------------------------------------------

Outcome entmax_suite() {
  Outcome o;
  const auto start = Clock::now();
  Rng rng(101);
  const double alphas[] = {1.0, 1.5, 2.0, 2.5};
  constexpr std::size_t kVectors = 10000;
  double simplex = 0.0, softmax = 0.0, sparsemax = 0.0, directional = 0.0, full = 0.0;
  std::size_t checked = 0;
  for (std::size_t v = 0; v < kVectors; ++v) {
    const std::size_t n = 1 + rng.uniform_index(64);
    const double spread = std::exp(rng.uniform(std::log(0.01), std::log(20.0)));
    std::vector<double> z(n), dir(n), g(n);
    for (double& x : z) x = spread * rng.normal();
    for (double& x : dir) x = rng.normal();
    for (double& x : g) x = rng.normal();
    for (double a : alphas) {
      const entmax::Alpha alpha{a};
      const auto p = entmax::forward(z, alpha);
      double sum = 0.0;
      for (double x : p) {
        sum += x;
        simplex = std::max(simplex, -x);
      }
      simplex = std::max(simplex, std::abs(sum - 1.0));
      if (a == 1.0) {
        const auto ref = oracle::softmax(z);
        for (std::size_t i = 0; i < n; ++i) softmax = std::max(softmax, std::abs(p[i] - ref[i]));
      }
      if (a == 2.0) {
        const auto ref = oracle::sparsemax(z);
        for (std::size_t i = 0; i < n; ++i) sparsemax = std::max(sparsemax, std::abs(p[i] - ref[i]));
      }

      // Finite differences of the long-double reference map, so that rounding stays far
      // below the tolerance even where the gradient is tiny. The step keeps the stencil
      // on one side of every support boundary.
      const auto grad = entmax::backward(p, g, alpha);
      const std::vector<long double> zl(z.begin(), z.end());
      double gap = std::numeric_limits<double>::infinity();
      if (a > 1.0) {
        const long double tau = oracle::entmax_ld(zl, a).tau;
        for (long double x : zl) gap = std::min(gap, static_cast<double>(std::abs((a - 1.0) * x - tau)));
      }
      auto objective = [&](const std::vector<long double>& zt) {
        const auto q = oracle::entmax_ld(zt, a).p;
        long double acc = 0.0L;
        for (std::size_t i = 0; i < n; ++i) acc += q[i] * g[i];
        return acc;
      };
      auto derivative = [&](const std::vector<double>& d) {
        double dmax = 0.0;
        for (double x : d) dmax = std::max(dmax, std::abs(x));
        const long double h = std::min(1e-5, 1e-3 * gap / (2.0 * std::max(a - 1.0, 1e-3) * dmax));
        std::vector<long double> up = zl, down = zl;
        for (std::size_t i = 0; i < n; ++i) {
          up[i] += h * d[i];
          down[i] -= h * d[i];
        }
        return static_cast<double>((objective(up) - objective(down)) / (2.0L * h));
      };
      const double analytic = std::inner_product(grad.begin(), grad.end(), dir.begin(), 0.0);
      directional = std::max(directional, oracle::norm_relative_error({analytic}, {derivative(dir)}));

      // Full coordinate-wise check on a subset.
      if (v < 200) {
        std::vector<double> fd(n), e(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          e[i] = 1.0;
          fd[i] = derivative(e);
          e[i] = 0.0;
        }
        full = std::max(full, oracle::norm_relative_error(grad, fd));
      }
      ++checked;
    }
  }
  const double elapsed = seconds_since(start);
  o.detail << checked << " evaluations; simplex " << fmt(simplex) << ", softmax " << fmt(softmax)
           << ", sparsemax " << fmt(sparsemax) << ", directional FD " << fmt(directional)
           << ", coordinate FD " << fmt(full) << ", " << fmt(elapsed) << " s";
  o.require(simplex <= 1e-8, "simplex <= 1e-8");
  o.require(softmax <= 1e-6, "softmax <= 1e-6");
  o.require(sparsemax <= 1e-9, "sparsemax <= 1e-9");
  o.require(directional <= 1e-4 && full <= 1e-4, "finite differences <= 1e-4");
  o.require(elapsed < 30.0, "runtime < 30 s");
  return o;
}

// 2 ---------------------------------------------------------------------------------------

Outcome gradient_suite() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_case;
  std::size_t cases = 0;

  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(1000 + seed);
    const std::size_t r = 2 + rng.uniform_index(3), c = 2 + rng.uniform_index(3), k = 2 + rng.uniform_index(3);
    Parameter a("a", oracle::random_tensor({r, c}, rng));
    Parameter b("b", oracle::random_tensor({r, c}, rng));
    Parameter m("m", oracle::random_tensor({c, k}, rng));
    Parameter cube("cube", oracle::random_tensor({2, r, c}, rng));
    Parameter bias("bias", oracle::random_tensor({c}, rng));
    Parameter kbias("kbias", oracle::random_tensor({k}, rng));
    const std::vector<Parameter*> basic{&a, &b, &m, &cube, &bias, &kbias};

    auto probe = [](Tape& t, const Var& v) {
      Rng pr(7);
      return ops::sum(ops::hadamard(v, t.constant(oracle::random_tensor(v.shape(), pr))));
    };
    const std::vector<std::size_t> idx{r - 1, 0, r - 1};
    const Tensor target = oracle::random_tensor({1, r, c, 1}, rng);

    std::vector<std::pair<std::string, std::function<Var(Tape&)>>> ops_cases = {
        {"matmul", [&](Tape& t) { return probe(t, ops::matmul(t.parameter(a), t.parameter(m))); }},
        {"batched matmul", [&](Tape& t) { return probe(t, ops::matmul(t.parameter(cube), t.parameter(m))); }},
        {"add", [&](Tape& t) { return probe(t, ops::add(t.parameter(a), t.parameter(b))); }},
        {"sub", [&](Tape& t) { return probe(t, ops::sub(t.parameter(a), t.parameter(b))); }},
        {"hadamard", [&](Tape& t) { return probe(t, ops::hadamard(t.parameter(a), t.parameter(b))); }},
        {"scale", [&](Tape& t) { return probe(t, ops::scale(t.parameter(a), 1.3)); }},
        {"shift", [&](Tape& t) { return probe(t, ops::hadamard(ops::shift(t.parameter(a), -0.4), t.parameter(b))); }},
        {"add_bias", [&](Tape& t) { return probe(t, ops::add_bias(t.parameter(cube), t.parameter(bias))); }},
        {"sigmoid", [&](Tape& t) { return probe(t, ops::sigmoid(t.parameter(a))); }},
        {"tanh", [&](Tape& t) { return probe(t, ops::tanh(t.parameter(a))); }},
        {"relu", [&](Tape& t) { return probe(t, ops::relu(t.parameter(a))); }},
        {"abs", [&](Tape& t) { return probe(t, ops::abs(t.parameter(a))); }},
        {"concat", [&](Tape& t) { return probe(t, ops::concat({t.parameter(a), t.parameter(b)})); }},
        {"stack", [&](Tape& t) {
           const std::vector<Var> parts{t.parameter(a), t.parameter(b)};
           return probe(t, ops::stack(parts, 0));
         }},
        {"gather", [&](Tape& t) { return probe(t, ops::gather(t.parameter(cube), 1, idx)); }},
        {"reshape", [&](Tape& t) { return probe(t, ops::reshape(t.parameter(a), {c, r})); }},
        {"sum", [&](Tape& t) { return ops::sum(ops::tanh(t.parameter(cube))); }},
        {"entmax", [&](Tape& t) { return probe(t, entmax::apply(t.parameter(cube), 1, entmax::Alpha{1.5})); }},
        {"mae", [&](Tape& t) {
           return mae_loss(ops::reshape(t.parameter(a), {1, r, c, 1}), target, Tensor({1, r, c}, 1.0));
         }},
    };
    // Model-level operations.
    const std::size_t n = 3 + rng.uniform_index(4), width = 2 + rng.uniform_index(3);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(pool[i - 1], pool[rng.uniform_index(i)]);
    const IndexSet ids(std::vector<std::size_t>(pool.begin(), pool.begin() + 2), n);
    Parameter adj("adjacency", oracle::random_tensor({n, 2}, rng, 0.0, 1.5));
    Parameter x("x", oracle::random_tensor({2, n, width}, rng));
    Parameter hstate("h", oracle::random_tensor({2, n, 3}, rng, -0.9, 0.9));
    Parameter emb("embedding", oracle::random_tensor({n, 3}, rng));
    diffusion::DiffusionWeights dw("conv", width, 2, 3, rng);
    diffusion::GruWeights cell("cell", width, 3, 1, 2, rng);
    for (Parameter* p : {&cell.reset_bias, &cell.update_bias, &cell.candidate_bias}) {
      for (double& v : p->value().data()) v = rng.uniform(-0.5, 0.5);
    }
    graph::AttentionWeights att(3, 2, 4, rng);
    for (double& v : att.projection.value().data()) v = std::abs(v) + 0.1;
    std::vector<Parameter*> model_params{&adj, &x, &hstate, &emb};
    for (Parameter* p : dw.parameters()) model_params.push_back(p);
    for (Parameter* p : cell.parameters()) model_params.push_back(p);
    for (Parameter* p : att.parameters()) model_params.push_back(p);
    ops_cases.push_back({"diffusion_step", [&](Tape& t) {
                           return probe(t, diffusion::diffusion_step(t.parameter(adj), ids, t.parameter(x)));
                         }});
    ops_cases.push_back({"fast_graph_conv", [&](Tape& t) {
                           const SlimAdjacency sa{t.parameter(adj), ids};
                           return probe(t, diffusion::fast_graph_conv(sa, t.parameter(x), dw));
                         }});
    ops_cases.push_back({"slim adjacency", [&](Tape& t) {
                           return probe(t, graph::compute_slim_adjacency(t, emb, ids, att, entmax::Alpha{2.0}).values);
                         }});
    ops_cases.push_back({"one_step_fast_gconv", [&](Tape& t) {
                           const auto sa = graph::compute_slim_adjacency(t, emb, ids, att, entmax::Alpha{1.5});
                           const auto out = diffusion::one_step_fast_gconv(sa, t.parameter(x), t.parameter(hstate), cell);
                           return ops::add(probe(t, out.hidden), probe(t, out.prediction));
                         }});

    for (const auto& [name, loss] : ops_cases) {
      std::vector<Parameter*> params = basic;
      params.insert(params.end(), model_params.begin(), model_params.end());
      const auto res = oracle::check_gradients(params, loss);
      ++cases;
      if (res.worst >= worst) {
        worst = res.worst;
        worst_case = name + " (" + res.worst_name + ")";
      }
    }
  }
  const double elapsed = seconds_since(start);
  o.detail << cases << " checks; worst relative error " << fmt(worst) << " in " << worst_case << ", "
           << fmt(elapsed) << " s";
  o.require(worst <= 1e-4, "relative error <= 1e-4");
  o.require(elapsed < 120.0, "runtime < 2 min");
  return o;
}

// 3 ---------------------------------------------------------------------------------------

Outcome slim_dense_oracle() {
  Outcome o;
  Rng rng(303);
  double conv_err = 0.0;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (std::size_t depth = 1; depth <= 3; ++depth) {
      diffusion::DiffusionWeights w("w", 3, 2, depth, rng);
      const Tensor a = oracle::random_tensor({n, n}, rng, 0.0, 1.5);
      const Tensor x = oracle::random_tensor({2, n, 3}, rng);
      Tape tape;
      const SlimAdjacency adj{tape.constant(a), IndexSet::identity(n)};
      const Tensor got = diffusion::fast_graph_conv(adj, tape.constant(x), w).value();
      std::vector<Tensor> ws;
      for (const Parameter& p : w.steps) ws.push_back(p.value());
      conv_err = std::max(conv_err, max_abs_diff(got, oracle::dense_graph_conv(a, x, ws)));
    }
  }

  ModelConfig c;
  c.nodes = 8;
  c.neighbors = 8;
  c.embedding_dim = 4;
  c.hidden = 4;
  c.heads = 2;
  c.depth = 3;
  c.history = 4;
  c.horizon = 3;
  c.batch_size = 4;
  c.learning_rate = 0.01;
  c.graph_mode = GraphMode::kDense;
  c.convergence_iteration = 0;
  c.seed = 8;
  const auto synth = data::synth_generate(8, 200, 2, 5);
  const auto splits = data::split(synth.data);
  const auto scaler = data::Scaler::fit(splits.train);
  const auto windows = data::make_windows(splits.train, {c.history, c.horizon, 1}, scaler, {true, false});
  TrainState state = make_train_state(c, scaler);
  oracle::DenseReference ref(state.model, scaler);
  double loss_err = 0.0, param_err = 0.0;
  for (std::size_t it = 0; it < 3; ++it) {
    const auto batch = windows.batch_range(4 * it, 4 * it + 4);
    const double want = ref.step(batch);
    const double got = train_step(state, batch);
    loss_err = std::max(loss_err, std::abs(got - want));
    for (const Parameter* p : state.model.parameters()) {
      param_err = std::max(param_err, max_abs_diff(p->value(), ref.param(p->name()).value()));
    }
  }
  o.detail << "graph conv max error " << fmt(conv_err) << "; 3-iteration loss error " << fmt(loss_err)
           << ", parameter error " << fmt(param_err);
  o.require(conv_err <= 1e-10, "graph conv <= 1e-10");
  o.require(loss_err <= 1e-8 && param_err <= 1e-8, "trajectory <= 1e-8");
  return o;
}

// 4 ---------------------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> rows_of(const graph::CandidateMatrix& c) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < c.nodes(); ++i) out.emplace_back(c.row(i).begin(), c.row(i).end());
  return out;
}

Outcome neighbor_sampling() {
  Outcome o;
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 5 + rng.uniform_index(46), m = 2 + rng.uniform_index(n - 2);
    const std::size_t k = 1 + rng.uniform_index(m - 1);
    const Tensor e = oracle::random_tensor({n, 1 + rng.uniform_index(8)}, rng);
    graph::CandidateMatrix c = graph::init_candidates(n, m, seed + 50);
    const auto ref = oracle::significant_neighbors(e, rows_of(c), k, seed + 60);
    const IndexSet got = graph::sample_significant_neighbors(e, c, k, seed + 60);
    const std::vector<std::size_t> ids(got.ids().begin(), got.ids().end());
    if (ids != ref.index_set || rows_of(c) != ref.rows) ++mismatches;
  }

  // Embeddings placing the generator's hubs in one tight cluster and every other node far
  // away on a sphere: the hubs are the nearest candidates of every row that holds them.
  const std::size_t n = 50, hubs = 10, m = 30, d = 16;
  double worst_recall = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto synth = data::synth_generate(n, 20, hubs, seed);
    const std::set<std::size_t> hub_set(synth.hubs.begin(), synth.hubs.end());
    Rng rng(seed + 7);
    Tensor e({n, d});
    for (std::size_t i = 0; i < n; ++i) {
      if (hub_set.count(i)) {
        for (std::size_t j = 0; j < d; ++j) e(i, j) = 1e-3 * rng.normal();
      } else {
        std::vector<double> u(d);
        double norm = 0.0;
        for (double& v : u) {
          v = rng.normal();
          norm += v * v;
        }
        for (std::size_t j = 0; j < d; ++j) e(i, j) = 5.0 * u[j] / std::sqrt(norm);
      }
    }
    graph::CandidateMatrix c = graph::init_candidates(n, m, seed);
    const IndexSet got = graph::sample_significant_neighbors(e, c, hubs, seed);
    std::size_t hit = 0;
    for (std::size_t j = 0; j < hubs; ++j) hit += hub_set.count(got[j]);
    worst_recall = std::min(worst_recall, static_cast<double>(hit) / static_cast<double>(hubs));
  }
  o.detail << "brute-force mismatches " << mismatches << "/20; worst planted hub recall "
           << fmt(100.0 * worst_recall) << "% over 20 seeds (N=50, M=30, K=10)";
  o.require(mismatches == 0, "brute-force equivalence");
  o.require(worst_recall == 1.0, "100% recall");
  return o;
}

// 5 ---------------------------------------------------------------------------------------

Outcome scaling() {
  Outcome o;
  const auto start = Clock::now();
  bench::BenchOptions slim;
  slim.repetitions = 3;
  const auto slim_report = bench::run(slim);
  bench::BenchOptions dense;
  dense.dense = true;
  dense.nodes = {200, 400};
  dense.repetitions = 3;
  const auto dense_report = bench::run(dense);
  const double elapsed = seconds_since(start);
  o.detail << "slim memory slope " << fmt(slim_report.memory_slope) << " (M=100, N=500..2000), dense "
           << fmt(dense_report.memory_slope) << " (N=200, 400); " << fmt(elapsed) << " s";
  o.require(std::abs(slim_report.memory_slope - 1.0) <= 0.3, "slim slope 1.0 +- 0.3");
  o.require(std::abs(dense_report.memory_slope - 2.0) <= 0.3, "dense slope 2.0 +- 0.3");
  o.require(elapsed < 600.0, "runtime < 10 min");
  return o;
}

// 6-8 ---------------------------------------------------------------------------------------

struct Workspace {
  fs::path dir;
  std::string data;
  std::map<std::string, double> elapsed;

  int cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code;
  }

  void prepare() {
    fs::create_directories(dir);
    data = (dir / "synth.csv").string();
    if (cli({"synth", "--nodes", "50", "--steps", "5000", "--hubs", "10", "--seed", "0", "--out", data}) != 0) {
      throw std::runtime_error("synth failed");
    }
  }

  // Trains with the desk configuration plus `extra` into dir/name, once per name.
  fs::path run(const std::string& name, std::vector<std::string> extra) {
    const fs::path out = dir / name;
    if (fs::exists(out / "metrics.json")) return out;
    std::vector<std::string> args{"train",       "--data",    data,  "--out",          out.string(),
                                  "--epochs",    "50",        "--M", "15",             "--K",
                                  "10",          "--embedding-dim", "16", "--hidden", "16",
                                  "--heads",     "2",         "--J", "2",              "--batch-size",
                                  "32",          "--train-stride", "4", "--horizons", "3",
                                  "--seed",      "0"};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto start = Clock::now();
    if (cli(args) != 0) throw std::runtime_error("training run " + name + " failed");
    elapsed[name] = seconds_since(start);
    return out;
  }

  static double horizon3(const fs::path& run_dir) {
    std::ifstream in(run_dir / "metrics.json");
    return nlohmann::json::parse(in).at("3").at("mae").get<double>();
  }

  static std::vector<double> val_curve(const fs::path& run_dir) {
    std::ifstream in(run_dir / "train_log.csv");
    std::string line;
    std::getline(in, line);
    std::vector<double> out;
    while (std::getline(in, line)) out.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    return out;
  }

  double persistence() const {
    const auto dataset = data::load_csv(data);
    const auto splits = data::split(dataset);
    const auto scaler = data::Scaler::fit(splits.train);
    const auto windows = data::make_windows(splits.test, {12, 12, 1}, scaler, {true, false});
    const std::size_t h[] = {3};
    return evaluate_persistence(windows, h).at(3).mae;
  }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome end_to_end(Workspace& ws) {
  Outcome o;
  const fs::path slim = ws.run("slim", {});
  const fs::path none = ws.run("none", {"--graph-mode", "none"});
  const double model = Workspace::horizon3(slim), ablation = Workspace::horizon3(none);
  const double baseline = ws.persistence();
  const auto curve = Workspace::val_curve(slim);
  bool monotone = curve.size() >= 5;
  for (std::size_t i = 1; i < 5 && i < curve.size(); ++i) monotone = monotone && curve[i] < curve[i - 1];
  const double vs_persistence = 1.0 - model / baseline, vs_none = 1.0 - model / ablation;
  o.detail << "horizon-3 MAE " << fmt(model) << " vs persistence " << fmt(baseline) << " ("
           << fmt(100.0 * vs_persistence) << "% lower) and no-graph " << fmt(ablation) << " ("
           << fmt(100.0 * vs_none) << "% lower); first 5 validation MAEs "
           << (monotone ? "decreasing" : "not decreasing") << "; " << fmt(ws.elapsed["slim"]) << " s per run";
  o.require(vs_persistence >= 0.10, ">= 10% below persistence");
  o.require(vs_none >= 0.05, ">= 5% below no-graph");
  o.require(monotone, "monotone validation MAE");
  o.require(ws.elapsed["slim"] < 900.0, "runtime < 15 min");
  return o;
}

Outcome alpha_ablation(Workspace& ws) {
  Outcome o;
  const double sparse = Workspace::horizon3(ws.run("slim", {}));
  const double dense = Workspace::horizon3(ws.run("alpha1", {"--alpha", "1"}));
  o.detail << "horizon-3 MAE alpha 2: " << fmt(sparse) << ", alpha 1: " << fmt(dense);
  o.require(sparse <= dense, "alpha 2 <= alpha 1");
  return o;
}

Outcome determinism(Workspace& ws) {
  Outcome o;
  const fs::path first = ws.run("slim", {});
  const fs::path second = ws.run("slim_repeat", {});
  const bool logs = slurp(first / "train_log.csv") == slurp(second / "train_log.csv");
  const bool metrics = slurp(first / "metrics.json") == slurp(second / "metrics.json");
  o.detail << "train_log.csv " << (logs ? "identical" : "differs") << ", metrics.json "
           << (metrics ? "identical" : "differs");
  o.require(logs && metrics, "byte-identical logs");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  fs::path work = fs::temp_directory_path() / "slimcast_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      selected.insert(std::stoi(arg));
    }
  }
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  Workspace ws{work, {}, {}};
  bool needs_runs = selected.count(6) || selected.count(7) || selected.count(8);
  if (needs_runs) {
    fs::remove_all(work);
    ws.prepare();
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"entmax suite", entmax_suite},
      {"gradient suite", gradient_suite},
      {"slim/dense oracle", slim_dense_oracle},
      {"neighbor sampling oracle", neighbor_sampling},
      {"memory scaling", scaling},
      {"end-to-end learning", [&] { return end_to_end(ws); }},
      {"entmax ablation direction", [&] { return alpha_ablation(ws); }},
      {"determinism", [&] { return determinism(ws); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": "
              << o.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
