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

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ckernel/gram.hpp"

namespace ckernel {

inline constexpr double kDefaultTilt = 0.3;
inline constexpr double kResidualTolerance = 1e-6;

/// Cholesky factor of K + lambda I. If the plain factorization fails, one
/// retry adds jitter 1e-8 * trace(K) / N; `jitter` records what was used.
class SpdSystem {
 public:
  SpdSystem(const Eigen::MatrixXd& k, double lambda);

  double lambda() const { return lambda_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return k_->rows(); }

  /// Solves (K + lambda I) X = rhs and enforces the residual contract
  /// against the un-jittered system; throws FactorizationFailed otherwise.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  /// Q = (K + lambda I)^-1, materialized on demand.
  Eigen::MatrixXd inverse() const;

 private:
  const Eigen::MatrixXd* k_;
  double lambda_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct RidgeModel {
  Eigen::MatrixXd alpha;  // N x C
  Eigen::MatrixXd labels; // N x C one-hot
  double lambda = 0.0;
  double tilt = 0.0;
  double jitter = 0.0;
  bool tilted = false;
};

struct Prediction {
  Eigen::MatrixXd scores;
  std::vector<int> labels;
};

RidgeModel ridge_fit(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda);
RidgeModel ridge_fit(const GramMatrix& k, const Eigen::MatrixXd& y, double lambda);

/// scores = K_cross alpha, label = argmax with ties to the lowest class.
Prediction predict(const RidgeModel& model, const Eigen::MatrixXd& k_cross);
Prediction predict(const RidgeModel& model, const GramMatrix& k_cross, std::span<const std::uint32_t> train_ids = {});
std::vector<int> argmax_rows(const Eigen::MatrixXd& scores);

/// Closed-form leave-one-out predictions Y - alpha / diag(Q).
Eigen::MatrixXd loo_predict(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda);
Eigen::MatrixXd loo_from(const SpdSystem& system, const Eigen::MatrixXd& y, const Eigen::MatrixXd& alpha);

/// alpha = (K + lambda I)^-1 (Y - t Y_loo). t = 0 takes the same path as
/// ridge_fit and gives an identical alpha.
RidgeModel tilted_fit(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda, double t = kDefaultTilt);

/// {0} followed by 1e-4 ... 1e6 in decade steps.
std::vector<double> default_lambda_grid();

struct SweepEntry {
  double lambda = 0.0;
  bool ok = false;
  double accuracy = 0.0;
  std::string error;
};

struct SweepResult {
  double best_lambda = 0.0;
  double best_accuracy = 0.0;
  std::vector<SweepEntry> entries;
};

/// Validation on a held-out set (K_val x train) ...
struct HoldoutValidation {
  const Eigen::MatrixXd* k_cross = nullptr;
  std::span<const int> labels;
};

/// ... or, without one, closed-form leave-one-out accuracy on the training set.
SweepResult lambda_sweep(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, std::span<const int> train_labels,
                         std::optional<HoldoutValidation> holdout, const std::vector<double>& grid,
                         unsigned threads = 1);

/// exp(-|x - z|^2 / (2 gamma^2)) with gamma a length scale.
Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb, double gamma);
Eigen::MatrixXd linear_gram(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb);
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb);

/// Median pairwise Euclidean distance over at most `max_rows` rows (a seeded
/// subsample beyond that).
double median_heuristic(const Eigen::MatrixXd& x, std::uint64_t seed = 0, std::size_t max_rows = 2000);
/// nu * 2^i for i in [-19, 20].
std::vector<double> bandwidth_grid(double nu);

/// "CKRM" file: lambda f64, t f64, N u32, C u32, alpha row-major f64, LE.
void write_model(const std::filesystem::path& path, const RidgeModel& model);
RidgeModel read_model(const std::filesystem::path& path);

}  // namespace ckernel
