/*
 * Copyright 2026 The ckernel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "doctest.h"

#include <filesystem>
#include <random>

#include "ckernel/data.hpp"
#include "ckernel/errors.hpp"
#include "ckernel/oracles.hpp"
#include "ckernel/regression.hpp"

using namespace ckernel;
using Eigen::MatrixXd;

namespace {

MatrixXd random_spd(Eigen::Index n, std::uint64_t seed, double ridge = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  MatrixXd a(n, n + 2);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a * a.transpose() / static_cast<double>(n) + ridge * MatrixXd::Identity(n, n);
}

MatrixXd random_labels(Eigen::Index n, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = static_cast<int>(rng() % static_cast<std::uint64_t>(classes));
  return one_hot(y, classes);
}

}  // namespace

TEST_CASE("ridge on identity systems") {
  const MatrixXd y = one_hot(std::vector<int>{0, 2, 1}, 3);
  const MatrixXd k = MatrixXd::Identity(3, 3);
  CHECK(ridge_fit(k, y, 0.0).alpha.isApprox(y));
  CHECK(ridge_fit(k, y, 1.0).alpha.isApprox(y / 2));
}

TEST_CASE("ridge matches an explicit inverse") {
  const MatrixXd k = random_spd(3, 1);
  const MatrixXd y = random_labels(3, 2, 2);
  const MatrixXd ref = (k + 0.5 * MatrixXd::Identity(3, 3)).inverse() * y;
  CHECK((ridge_fit(k, y, 0.5).alpha - ref).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ridge residual contract") {
  const MatrixXd k = random_spd(40, 3, 1e-3);
  const MatrixXd y = random_labels(40, 4, 4);
  for (double lambda : {0.0, 1e-3, 1.0}) {
    const auto m = ridge_fit(k, y, lambda);
    const MatrixXd r = (k + lambda * MatrixXd::Identity(40, 40)) * m.alpha - y;
    CHECK(r.norm() <= kResidualTolerance * y.norm());
  }
}

TEST_CASE("singular system at lambda zero is reported") {
  MatrixXd k = MatrixXd::Ones(3, 3);
  const MatrixXd y = one_hot(std::vector<int>{0, 1, 0}, 2);
  try {
    ridge_fit(k, y, 0.0);
    FAIL("expected factorization failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FactorizationFailed);
    CHECK(std::string(e.what()).find("lambda") != std::string::npos);
  }
  CHECK_NOTHROW(ridge_fit(k, y, 1.0));
}

TEST_CASE("gram overload rejects non-symmetric training gram") {
  GramMatrix g;
  g.values = MatrixXd::Identity(2, 2);
  g.values(0, 1) = 0.5;
  CHECK_THROWS_AS(ridge_fit(g, MatrixXd::Identity(2, 2), 0.1), Error);
}

TEST_CASE("predict") {
  const MatrixXd k = random_spd(6, 5);
  const std::vector<int> labels{0, 1, 2, 2, 1, 0};
  const auto model = ridge_fit(k, one_hot(labels, 3), 0.0);
  const auto interp = predict(model, k);
  CHECK(interp.labels == labels);
  const auto zero = predict(model, MatrixXd::Zero(1, 6));
  CHECK(zero.labels == std::vector<int>{0});
  CHECK_THROWS_AS(predict(model, MatrixXd::Zero(1, 5)), Error);
  CHECK(argmax_rows(MatrixXd::Constant(2, 3, 1.0)) == std::vector<int>{0, 0});
}

TEST_CASE("predict on a hand-solved two-point system") {
  // K = [[2,1],[1,2]], lambda = 1 -> (K+I)^-1 = [[3,-1],[-1,3]]/8.
  MatrixXd k(2, 2);
  k << 2, 1, 1, 2;
  const MatrixXd y = one_hot(std::vector<int>{0, 1}, 2);
  const auto model = ridge_fit(k, y, 1.0);
  MatrixXd expected(2, 2);
  expected << 3.0 / 8, -1.0 / 8, -1.0 / 8, 3.0 / 8;
  CHECK((model.alpha - expected).cwiseAbs().maxCoeff() < 1e-14);
  MatrixXd cross(1, 2);
  cross << 1.0, 0.2;
  const auto p = predict(model, cross);
  CHECK(p.scores(0, 0) == doctest::Approx(3.0 / 8 - 0.2 / 8));
  CHECK(p.scores(0, 1) == doctest::Approx(-1.0 / 8 + 0.6 / 8));
  CHECK(p.labels[0] == 0);
}

TEST_CASE("predict checks training ids") {
  const MatrixXd k = random_spd(3, 7);
  const auto model = ridge_fit(k, one_hot(std::vector<int>{0, 1, 0}, 2), 0.1);
  GramMatrix cross;
  cross.values = k;
  cross.row_ids = {0, 1, 2};
  cross.col_ids = {0, 1, 2};
  const std::vector<std::uint32_t> good{0, 1, 2}, bad{0, 2, 1};
  CHECK_NOTHROW(predict(model, cross, good));
  CHECK_THROWS_AS(predict(model, cross, bad), Error);
}

TEST_CASE("predict is invariant to common rescaling") {
  const MatrixXd k = random_spd(12, 8);
  const MatrixXd y = random_labels(12, 3, 9);
  const MatrixXd cross = random_spd(12, 10).topRows(5);
  const auto a = predict(ridge_fit(k, y, 0.3), cross);
  const auto b = predict(ridge_fit(7.5 * k, y, 7.5 * 0.3), 7.5 * cross);
  CHECK(a.labels == b.labels);
  CHECK((a.scores - b.scores).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("closed-form LOO equals brute-force refits") {
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 5 + 2 * trial;
    const MatrixXd k = random_spd(n, 100 + static_cast<std::uint64_t>(trial), 0.05);
    const MatrixXd y = random_labels(n, 3, 200 + static_cast<std::uint64_t>(trial));
    for (double lambda : {0.01, 1.0}) {
      const MatrixXd fast = loo_predict(k, y, lambda);
      const MatrixXd slow = brute_loo(k, y, lambda);
      CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("LOO special cases") {
  const MatrixXd one = MatrixXd::Constant(1, 1, 2.0);
  CHECK(loo_predict(one, MatrixXd::Ones(1, 2), 0.5).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(loo_predict(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2), 1.0).cwiseAbs().maxCoeff() < 1e-15);

  // Twin examples: the held-out prediction of one twin equals the fit from the other alone.
  MatrixXd k = random_spd(5, 11);
  k.row(4) = k.row(3);
  k.col(4) = k.col(3);
  k(4, 4) = k(3, 3);
  const MatrixXd y = random_labels(5, 2, 12);
  const double lambda = 0.2;
  const MatrixXd loo = loo_predict(k, y, lambda);
  std::vector<int> keep{0, 1, 2, 3};
  MatrixXd ks(4, 4), ys(4, 2);
  for (int i = 0; i < 4; ++i) {
    ys.row(i) = y.row(keep[static_cast<std::size_t>(i)]);
    for (int j = 0; j < 4; ++j) ks(i, j) = k(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
  }
  const MatrixXd alpha = (ks + lambda * MatrixXd::Identity(4, 4)).inverse() * ys;
  const MatrixXd twin_fit = k.row(4).head(4) * alpha;
  CHECK((loo.row(4) - twin_fit).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("tilted fit") {
  const MatrixXd k = random_spd(15, 13);
  const MatrixXd y = random_labels(15, 3, 14);
  const auto plain = ridge_fit(k, y, 0.1);
  const auto zero = tilted_fit(k, y, 0.1, 0.0);
  CHECK(zero.alpha.cwiseEqual(plain.alpha).all());

  const auto def = tilted_fit(k, y, 0.1);
  CHECK(def.tilt == 0.3);
  CHECK(kDefaultTilt == 0.3);

  // Independent recomputation: alpha(t) = alpha(0) - t * Q * Y_loo.
  const MatrixXd q = (k + 0.1 * MatrixXd::Identity(15, 15)).inverse();
  const MatrixXd yloo = brute_loo(k, y, 0.1);
  const MatrixXd expected = plain.alpha - 0.3 * q * yloo;
  CHECK((def.alpha - expected).cwiseAbs().maxCoeff() < 1e-8);
  const auto far = tilted_fit(k, y, 0.1, 0.6);
  CHECK((def.alpha - 0.5 * (plain.alpha + far.alpha)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(tilted_fit(k, y, 0.1, 1.0), Error);
}

TEST_CASE("lambda sweep") {
  const MatrixXd k = MatrixXd::Identity(4, 4);
  const std::vector<int> labels{0, 1, 0, 1};
  const MatrixXd y = one_hot(labels, 2);
  const auto only = lambda_sweep(k, y, labels, std::nullopt, {0.0});
  CHECK(only.best_lambda == 0.0);
  CHECK(only.entries.size() == 1);

  MatrixXd dup = MatrixXd::Ones(4, 4);
  dup.bottomRightCorner(2, 2) *= 2.0;
  dup.topRightCorner(2, 2).setZero();
  dup.bottomLeftCorner(2, 2).setZero();
  const std::vector<int> lab2{0, 1, 0, 1};  // twins disagree: no exact interpolant
  const MatrixXd cross = dup;
  const HoldoutValidation hv{&cross, lab2};
  const auto r = lambda_sweep(dup, one_hot(lab2, 2), lab2, hv, {0.0, 1e-4});
  REQUIRE(r.entries.size() == 2);
  CHECK_FALSE(r.entries[0].ok);
  CHECK_FALSE(r.entries[0].error.empty());
  CHECK(r.entries[1].ok);
  CHECK(r.best_lambda == 1e-4);

  const auto grid = default_lambda_grid();
  CHECK(grid.size() == 12);
  CHECK(grid.front() == 0.0);
  CHECK(grid[1] == 1e-4);
  CHECK(grid.back() == 1e6);
  const auto full = lambda_sweep(random_spd(20, 15), random_labels(20, 2, 16),
                                 argmax_rows(random_labels(20, 2, 16)), std::nullopt, grid, 2);
  CHECK(full.entries.size() == grid.size());
  CHECK_THROWS_AS(lambda_sweep(MatrixXd::Ones(2, 2), MatrixXd::Identity(2, 2), std::vector<int>{0, 1},
                               std::nullopt, {0.0}),
                  Error);
}

TEST_CASE("gaussian gram") {
  MatrixXd x(2, 2);
  x << 0, 0, 1, 1;
  const double gamma = 1.0;  // ||x - z|| = sqrt(2) = gamma * sqrt(2)
  const MatrixXd g = gaussian_gram(x, x, gamma);
  CHECK(g(0, 0) == 1.0);
  CHECK(g(0, 1) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(gaussian_gram(x, x, 0.0), Error);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  MatrixXd pts(60, 4);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = normal(rng);
  for (double gm : {0.05, 1.0, 30.0}) {
    const MatrixXd k = gaussian_gram(pts, pts, gm);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * 60);
  }
  CHECK(linear_gram(x, x)(1, 1) == 2.0);
}

TEST_CASE("median heuristic and bandwidth grid") {
  MatrixXd x(3, 1);
  x << 0, 1, 3;  // distances {1, 2, 3}
  CHECK(median_heuristic(x) == 2.0);
  const auto grid = bandwidth_grid(2.0);
  CHECK(grid.size() == 40);
  CHECK(grid.front() == std::ldexp(2.0, -19));
  CHECK(grid.back() == std::ldexp(2.0, 20));
}

TEST_CASE("model file round trip") {
  const MatrixXd k = random_spd(5, 18);
  const auto m = tilted_fit(k, random_labels(5, 3, 19), 0.25, 0.3);
  const auto path = std::filesystem::temp_directory_path() / "ckernel_model_test.ckrm";
  write_model(path, m);
  const auto r = read_model(path);
  CHECK(r.alpha == m.alpha);
  CHECK(r.lambda == 0.25);
  CHECK(r.tilt == 0.3);
}
