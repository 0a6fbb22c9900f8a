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

#include "ckernel/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ckernel/binary_io.hpp"
#include "ckernel/errors.hpp"
#include "ckernel/parallel.hpp"

namespace ckernel {

namespace {

void check_square(const Eigen::MatrixXd& k) {
  if (k.rows() != k.cols()) throw Error(ErrorKind::ShapeMismatch, "training Gram matrix must be square");
}

[[noreturn]] void factorization_failed(double lambda, const std::string& why) {
  throw Error(ErrorKind::FactorizationFailed,
              "K + " + std::to_string(lambda) + " I: " + why + "; try a larger lambda");
}

}  // namespace

SpdSystem::SpdSystem(const Eigen::MatrixXd& k, double lambda) : k_(&k), lambda_(lambda) {
  check_square(k);
  if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
  const Eigen::Index n = k.rows();
  Eigen::MatrixXd a = k;
  a.diagonal().array() += lambda;
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    jitter_ = n > 0 ? 1e-8 * k.trace() / static_cast<double>(n) : 0.0;
    a.diagonal().array() += jitter_;
    llt_.compute(a);
    if (llt_.info() != Eigen::Success || !(jitter_ > 0.0)) factorization_failed(lambda, "not positive definite");
  }
}

Eigen::MatrixXd SpdSystem::solve(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != size()) throw Error(ErrorKind::ShapeMismatch, "label rows differ from Gram size");
  Eigen::MatrixXd x = llt_.solve(rhs);
  Eigen::MatrixXd residual = (*k_) * x;
  residual += lambda_ * x;
  residual -= rhs;
  const double r = residual.norm();
  if (!std::isfinite(r) || r > kResidualTolerance * rhs.norm()) {
    factorization_failed(lambda_, "residual " + std::to_string(r) + " exceeds tolerance");
  }
  return x;
}

Eigen::MatrixXd SpdSystem::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(size(), size()));
}

RidgeModel ridge_fit(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda) {
  return tilted_fit(k, y, lambda, 0.0);
}

RidgeModel ridge_fit(const GramMatrix& k, const Eigen::MatrixXd& y, double lambda) {
  if (!k.symmetric && !k.values.isApprox(k.values.transpose())) {
    throw Error(ErrorKind::ShapeMismatch, "training Gram matrix is not symmetric");
  }
  return ridge_fit(k.values, y, lambda);
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()), 0);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

Prediction predict(const RidgeModel& model, const Eigen::MatrixXd& k_cross) {
  if (k_cross.cols() != model.alpha.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "cross Gram has " + std::to_string(k_cross.cols()) + " columns, model has " +
                                              std::to_string(model.alpha.rows()) + " training examples");
  }
  Prediction p;
  p.scores = k_cross * model.alpha;
  p.labels = argmax_rows(p.scores);
  return p;
}

Prediction predict(const RidgeModel& model, const GramMatrix& k_cross, std::span<const std::uint32_t> train_ids) {
  if (!train_ids.empty() && !std::equal(train_ids.begin(), train_ids.end(), k_cross.col_ids.begin(),
                                        k_cross.col_ids.end())) {
    throw Error(ErrorKind::ShapeMismatch, "cross Gram columns do not match the training ids");
  }
  return predict(model, k_cross.values);
}

Eigen::MatrixXd loo_from(const SpdSystem& system, const Eigen::MatrixXd& y, const Eigen::MatrixXd& alpha) {
  const Eigen::MatrixXd q = system.inverse();
  Eigen::MatrixXd out = y;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double qii = q(i, i);
    if (!(qii > 0.0)) {
      throw Error(ErrorKind::FactorizationFailed, "non-positive diagonal in (K + lambda I)^-1 at row " +
                                                      std::to_string(i) + "; the factorization is unreliable");
    }
    out.row(i) -= alpha.row(i) / qii;
  }
  return out;
}

Eigen::MatrixXd loo_predict(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda) {
  const SpdSystem system(k, lambda);
  return loo_from(system, y, system.solve(y));
}

RidgeModel tilted_fit(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda, double t) {
  if (!(t >= 0.0 && t < 1.0)) throw Error(ErrorKind::InvalidArgument, "tilt must lie in [0, 1)");
  const SpdSystem system(k, lambda);
  RidgeModel model;
  model.labels = y;
  model.lambda = lambda;
  model.tilt = t;
  model.tilted = t != 0.0;
  model.jitter = system.jitter();
  if (t == 0.0) {
    model.alpha = system.solve(y);
  } else {
    const Eigen::MatrixXd y_loo = loo_from(system, y, system.solve(y));
    model.alpha = system.solve(y - t * y_loo);
  }
  return model;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid{0.0};
  for (int e = -4; e <= 6; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

SweepResult lambda_sweep(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, std::span<const int> train_labels,
                         std::optional<HoldoutValidation> holdout, const std::vector<double>& grid,
                         unsigned threads) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "lambda grid is empty");
  check_square(k);
  if (holdout && (holdout->k_cross == nullptr || holdout->k_cross->cols() != k.rows() ||
                  static_cast<std::size_t>(holdout->k_cross->rows()) != holdout->labels.size())) {
    throw Error(ErrorKind::ShapeMismatch, "holdout Gram does not match training set or labels");
  }
  if (!holdout && train_labels.size() != static_cast<std::size_t>(k.rows())) {
    throw Error(ErrorKind::ShapeMismatch, "training labels do not match Gram size");
  }
  SweepResult result;
  result.entries.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t g) {
    auto& entry = result.entries[g];
    entry.lambda = grid[g];
    try {
      const SpdSystem system(k, grid[g]);
      const Eigen::MatrixXd alpha = system.solve(y);
      std::vector<int> predicted;
      std::span<const int> truth;
      if (holdout) {
        predicted = argmax_rows((*holdout->k_cross) * alpha);
        truth = holdout->labels;
      } else {
        predicted = argmax_rows(loo_from(system, y, alpha));
        truth = train_labels;
      }
      std::size_t correct = 0;
      for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == truth[i] ? 1 : 0;
      entry.accuracy = predicted.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(predicted.size());
      entry.ok = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FactorizationFailed) throw;
      entry.error = e.what();
    }
  });
  bool found = false;
  for (const auto& e : result.entries) {
    if (!e.ok) continue;
    if (!found || e.accuracy > result.best_accuracy ||
        (e.accuracy == result.best_accuracy && e.lambda < result.best_lambda)) {
      result.best_lambda = e.lambda;
      result.best_accuracy = e.accuracy;
      found = true;
    }
  }
  if (!found) throw Error(ErrorKind::FactorizationFailed, "every lambda in the grid failed to factorize");
  return result;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb) {
  if (xa.cols() != xb.cols()) throw Error(ErrorKind::ShapeMismatch, "feature counts differ");
  const Eigen::VectorXd na = xa.rowwise().squaredNorm();
  const Eigen::VectorXd nb = xb.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * xa * xb.transpose();
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  const double scale = -1.0 / (2.0 * gamma * gamma);
  Eigen::MatrixXd k = (squared_distances(xa, xb) * scale).array().exp().matrix();
  if (&xa == &xb) k = 0.5 * (k + k.transpose()).eval();
  return k;
}

Eigen::MatrixXd linear_gram(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb) {
  if (xa.cols() != xb.cols()) throw Error(ErrorKind::ShapeMismatch, "feature counts differ");
  return xa * xb.transpose();
}

double median_heuristic(const Eigen::MatrixXd& x, std::uint64_t seed, std::size_t max_rows) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "median heuristic needs at least two rows");
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (n > max_rows) {
    std::mt19937_64 rng(seed);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(max_rows);
  }
  std::vector<double> dist;
  dist.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      dist.push_back((x.row(static_cast<Eigen::Index>(rows[a])) - x.row(static_cast<Eigen::Index>(rows[b]))).norm());
    }
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  const double upper = dist[mid];
  if (dist.size() % 2 == 1) return upper;
  const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<double> bandwidth_grid(double nu) {
  if (!(nu > 0.0)) throw Error(ErrorKind::InvalidArgument, "median distance must be positive");
  std::vector<double> grid;
  for (int i = -19; i <= 20; ++i) grid.push_back(std::ldexp(nu, i));
  return grid;
}

void write_model(const std::filesystem::path& path, const RidgeModel& model) {
  ByteWriter w;
  w.tag("CKRM");
  w.f64(model.lambda);
  w.f64(model.tilt);
  w.u32(static_cast<std::uint32_t>(model.alpha.rows()));
  w.u32(static_cast<std::uint32_t>(model.alpha.cols()));
  for (Eigen::Index i = 0; i < model.alpha.rows(); ++i) {
    for (Eigen::Index c = 0; c < model.alpha.cols(); ++c) w.f64(model.alpha(i, c));
  }
  write_file_atomic(path, w.data());
}

RidgeModel read_model(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  r.expect_tag("CKRM");
  RidgeModel model;
  model.lambda = r.f64();
  model.tilt = r.f64();
  model.tilted = model.tilt != 0.0;
  const std::uint32_t n = r.u32();
  const std::uint32_t c = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * c * sizeof(double)) {
    throw Error(ErrorKind::Format, path.string() + ": model payload size does not match header");
  }
  model.alpha.resize(n, c);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < c; ++j) model.alpha(i, j) = r.f64();
  }
  return model;
}

}  // namespace ckernel
