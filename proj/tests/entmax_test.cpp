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

#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "slimcast/entmax.hpp"
#include "slimcast/ops.hpp"

using namespace slimcast;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double spread) {
  std::vector<double> z(n);
  for (double& v : z) v = spread * rng.normal();
  return z;
}

double simplex_error(const std::vector<double>& p) {
  double s = 0.0, neg = 0.0;
  for (double v : p) {
    s += v;
    neg = std::min(neg, v);
  }
  return std::max(std::abs(s - 1.0), -neg);
}

std::size_t support_size(const std::vector<double>& p) {
  return static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [](double v) { return v > 0.0; }));
}

}  // namespace

TEST_CASE("alpha range is enforced") {
  CHECK_THROWS_AS(entmax::Alpha{0.99}, std::invalid_argument);
  CHECK_THROWS_AS(entmax::Alpha{2.51}, std::invalid_argument);
  CHECK_NOTHROW(entmax::Alpha{1.0});
  CHECK_NOTHROW(entmax::Alpha{2.5});
}

TEST_CASE("entmax of a constant vector is uniform") {
  for (double alpha : {1.0, 1.3, 1.5, 2.0, 2.5}) {
    const std::vector<double> z(7, 0.42);
    for (double v : entmax::forward(z, entmax::Alpha{alpha})) CHECK(v == doctest::Approx(1.0 / 7).epsilon(1e-12));
  }
}

TEST_CASE("sparsemax examples") {
  const std::vector<double> z{1, 0, -1};
  const auto p = entmax::forward(z, entmax::Alpha{2.0});
  CHECK(p == std::vector<double>{1, 0, 0});
  const auto oracle_p = oracle::sparsemax(z);
  CHECK(oracle_p == std::vector<double>{1, 0, 0});

  const auto t = entmax::solve_threshold(z, entmax::Alpha{2.0});
  CHECK(t.tau == doctest::Approx(0.0));
  CHECK(t.support == std::vector<std::size_t>{0});

  const std::vector<double> zero{0, 0};
  const auto t2 = entmax::solve_threshold(zero, entmax::Alpha{2.0});
  CHECK(t2.tau == doctest::Approx(-0.5));
  CHECK(t2.support == std::vector<std::size_t>{0, 1});
  CHECK(entmax::forward(zero, entmax::Alpha{2.0}) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("extreme separation gives a one-hot output at alpha 1.5") {
  std::vector<double> z(6, -10.0);
  z[3] = 10.0;
  const auto t = entmax::solve_threshold(z, entmax::Alpha{1.5});
  CHECK(t.support == std::vector<std::size_t>{3});
  const auto p = entmax::forward(z, entmax::Alpha{1.5});
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(p[i] - (i == 3 ? 1.0 : 0.0)) <= 1e-9);
}

TEST_CASE("solve_threshold rejects alpha 1") {
  const std::vector<double> z{1, 2};
  CHECK_THROWS(entmax::solve_threshold(z, entmax::Alpha{1.0}));
}

TEST_CASE("simplex, limits, and bisection agree with the oracles") {
  Rng rng(1);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(40);
    const auto z = random_vector(rng, n, rng.uniform(0.05, 6.0));
    for (double alpha : {1.0, 1.25, 1.5, 2.0, 2.5}) {
      const auto p = entmax::forward(z, entmax::Alpha{alpha});
      CHECK(simplex_error(p) <= 1e-8);
      const auto q = oracle::entmax(z, alpha);
      double diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(p[i] - q[i]));
      CHECK(diff <= 1e-9);
    }
    const auto soft = entmax::forward(z, entmax::Alpha{1.0});
    const auto ref = oracle::softmax(z);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(soft[i] - ref[i]) <= 1e-6);

    // Bisection at alpha 2 versus the active-set sparsemax.
    const auto th = entmax::solve_threshold_bisection(z, entmax::Alpha{2.0});
    const auto sm = oracle::sparsemax(z);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(std::max(0.0, z[i] - th.tau) - sm[i]) <= 1e-9);
    }
  }
}

TEST_CASE("permutation equivariance and shift invariance") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(20);
    auto z = random_vector(rng, n, 2.0);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    for (double alpha : {1.0, 1.5, 2.0, 2.5}) {
      const auto p = entmax::forward(z, entmax::Alpha{alpha});
      std::vector<double> zp(n), shifted(n);
      for (std::size_t i = 0; i < n; ++i) {
        zp[i] = z[perm[i]];
        shifted[i] = z[i] + 3.7;
      }
      const auto pp = entmax::forward(zp, entmax::Alpha{alpha});
      const auto ps = entmax::forward(shifted, entmax::Alpha{alpha});
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(pp[i] - p[perm[i]]) <= 1e-12);
        CHECK(std::abs(ps[i] - p[i]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("support shrinks as alpha grows") {
  Rng rng(3);
  double s15 = 0.0, s20 = 0.0;
  const std::size_t n = 16;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto z = random_vector(rng, n, 1.0);
    CHECK(support_size(entmax::forward(z, entmax::Alpha{1.0})) == n);
    s15 += static_cast<double>(support_size(entmax::forward(z, entmax::Alpha{1.5})));
    s20 += static_cast<double>(support_size(entmax::forward(z, entmax::Alpha{2.0})));
  }
  CHECK(s20 <= s15);
  CHECK(s15 <= 1000.0 * n);
}

TEST_CASE("backward rule") {
  Rng rng(4);
  // Constant upstream is annihilated.
  for (double alpha : {1.0, 1.5, 2.0}) {
    const auto z = random_vector(rng, 9, 1.0);
    const auto p = entmax::forward(z, entmax::Alpha{alpha});
    const std::vector<double> g(9, 2.5);
    for (double v : entmax::backward(p, g, entmax::Alpha{alpha})) CHECK(std::abs(v) <= 1e-12);
  }
  // Softmax Jacobian.
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = random_vector(rng, 12, 1.5);
    const auto g = random_vector(rng, 12, 1.0);
    const auto p = entmax::forward(z, entmax::Alpha{1.0});
    const auto got = entmax::backward(p, g, entmax::Alpha{1.0});
    const auto want = oracle::softmax_jacobian_product(p, g);
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-10);
  }
  // Off-simplex input is rejected.
  const std::vector<double> bad{0.7, 0.7};
  const std::vector<double> g{1, 1};
  CHECK_THROWS(entmax::backward(bad, g, entmax::Alpha{1.5}));
}

TEST_CASE("backward matches finite differences") {
  Rng rng(5);
  for (double alpha : {1.0, 1.5, 2.0, 2.5}) {
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 2 + rng.uniform_index(15);
      auto z = random_vector(rng, n, 1.5);
      const auto g = random_vector(rng, n, 1.0);
      const auto p = entmax::forward(z, entmax::Alpha{alpha});
      const auto analytic = entmax::backward(p, g, entmax::Alpha{alpha});
      std::vector<double> numeric(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double saved = z[i];
        auto objective = [&] {
          const auto q = entmax::forward(z, entmax::Alpha{alpha});
          return std::inner_product(q.begin(), q.end(), g.begin(), 0.0);
        };
        z[i] = saved + 1e-6;
        const double up = objective();
        z[i] = saved - 1e-6;
        const double down = objective();
        z[i] = saved;
        numeric[i] = (up - down) / 2e-6;
      }
      CAPTURE(alpha);
      CHECK(oracle::norm_relative_error(analytic, numeric) <= 1e-4);
    }
  }
}

TEST_CASE("tape operation normalizes along the requested axis") {
  Rng rng(6);
  Parameter x("x", oracle::random_tensor({3, 5, 2}, rng));
  Tape tape;
  const Var out = entmax::apply(tape.parameter(x), 1, entmax::Alpha{1.5});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 2; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < 5; ++j) s += out.value()(i, j, k);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  tape.clear();
  for (double alpha : {1.0, 1.5, 2.0, 2.5}) {
    Rng probe_rng(7);
    const Tensor w = oracle::random_tensor({3, 5, 2}, probe_rng);
    const auto r = oracle::check_gradients({&x}, [&](Tape& t) {
      return ops::sum(ops::hadamard(entmax::apply(t.parameter(x), 1, entmax::Alpha{alpha}), t.constant(w)));
    });
    CAPTURE(alpha);
    CHECK(r.worst <= 1e-4);
  }
}
