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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "ckernel/config.hpp"
#include "ckernel/data.hpp"
#include "ckernel/evaluation.hpp"
#include "ckernel/regression.hpp"

namespace ckernel {

/// Training and test pools as loaded, before subsampling. When the source
/// has no separate test split, `test` is empty and test examples are drawn
/// from the training pool, disjoint from the training subset.
struct ImagePools {
  ImageDataset train;
  std::optional<ImageDataset> test;
};

ImagePools load_pools(const DatasetConfig& config);

struct Split {
  ImageDataset train;
  ImageDataset test;
  std::uint64_t seed = 0;
};

/// Subsamples (class-balanced) and preprocesses one trial. Statistics are
/// fitted on the training subset only; padding comes last.
Split prepare_split(const DatasetConfig& config, const ImagePools& pools, std::uint64_t seed);

std::vector<std::uint64_t> trial_seeds(const ExperimentConfig& config);
std::filesystem::path trial_dir(const ExperimentConfig& config, std::uint64_t seed);

struct BandwidthChoice {
  double gamma = 0.0;
  double lambda = 0.0;
  double accuracy = 0.0;
  double median = 0.0;
};

/// Picks the Gaussian length scale from nu * 2^i by held-out accuracy on a
/// seeded subset of at most `tuning_n` training rows (two thirds fit, one
/// third validate), sweeping `lambdas` for each. Ties go to the earlier grid
/// entry.
BandwidthChoice tune_gaussian_bandwidth(const Eigen::MatrixXd& x, std::span<const int> labels, int class_count,
                                        std::size_t tuning_n, const std::vector<double>& lambdas,
                                        std::uint64_t seed, unsigned threads = 0);

struct SolveOutcome {
  SweepResult sweep;
  RidgeModel model;
  Prediction prediction;
  AccuracyResult accuracy;
  Interval ci;
};

/// Lambda sweep on the training Gram (closed-form LOO, or a seeded holdout
/// of `holdout_n` rows), refit on all training rows with the chosen lambda
/// (tilted when t > 0) and score the test rows.
SolveOutcome solve_grams(const Eigen::MatrixXd& k_train, std::span<const int> train_labels,
                         const Eigen::MatrixXd& k_test, std::span<const int> test_labels, int class_count,
                         const SolveConfig& config, std::uint64_t seed, unsigned threads = 0);

// Subcommand drivers; each returns a process exit code and reports on `out`.
int cmd_prep(const ExperimentConfig& config, std::ostream& out);
int cmd_kernel(const ExperimentConfig& config, std::ostream& out, const std::atomic<bool>* cancel = nullptr);
int cmd_solve(const ExperimentConfig& config, std::ostream& out);
/// Inputs are CSV files with columns dataset,classifier,correct,n_eval.
int cmd_eval(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
             std::ostream& out);

}  // namespace ckernel
