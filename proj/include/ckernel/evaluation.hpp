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

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ckernel/data.hpp"
#include "ckernel/errors.hpp"

namespace ckernel {

struct AccuracyResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
};

AccuracyResult accuracy(std::span<const int> predicted, std::span<const int> truth);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Exact binomial interval; Beta quantiles found by bisection to 1e-10.
Interval clopper_pearson(std::size_t k, std::size_t n, double conf = 0.95);

/// Accuracy table: rows are datasets, columns are classifiers.
using AccuracyTable = Eigen::MatrixXd;

/// Mean rank per classifier (1 = best; ties share the mean rank).
Eigen::VectorXd friedman_rank(const AccuracyTable& table);
/// Percentage of datasets on which acc >= theta * max.
Eigen::VectorXd p_at(double theta, const AccuracyTable& table);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
};

/// Mean and sample std of 100 * acc / max over datasets.
std::vector<MeanStd> pma(const AccuracyTable& table);
/// Mean and sample std of raw accuracy (in the table's units) over datasets.
std::vector<MeanStd> mean_accuracy(const AccuracyTable& table);

struct ProfilePoint {
  double tau = 0.0;
  double fraction = 0.0;
};

/// 0 to 0.2 in steps of 0.002.
std::vector<double> default_tau_grid();
/// Per classifier, the fraction of datasets with max - acc <= tau.
std::vector<std::vector<ProfilePoint>> performance_profile(const AccuracyTable& table,
                                                           const std::vector<double>& taus = default_tau_grid());

/// Stratified fold assignment: each class is shuffled under `seed` and dealt
/// round-robin, with the deal position carried over from class to class.
std::vector<int> stratified_folds(std::span<const int> labels, int class_count, int folds, std::uint64_t seed);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

FoldSplit fold_split(std::span<const int> fold_of, int fold);

template <class Setting>
struct ProtocolResult {
  std::size_t chosen = 0;
  Setting setting{};
  double accuracy = 0.0;                   // mean over folds at `chosen`
  std::vector<double> mean_accuracy;       // per setting
  std::vector<std::vector<double>> folds;  // per setting, per fold
  std::size_t degenerate_folds = 0;
};

/// Fits on three folds and scores on the fourth; returns validation predictions.
template <class Setting>
using FoldClassifier =
    std::function<std::vector<int>(const TabularDataset&, const FoldSplit&, const Setting&)>;

void log_degenerate_fold(int fold, int label);

/// Four-fold tuning: every setting is scored on the mean validation accuracy
/// over the folds; ties go to the earliest setting.
template <class Setting>
ProtocolResult<Setting> uci_protocol(const TabularDataset& data, const FoldClassifier<Setting>& classifier,
                                     const std::vector<Setting>& grid, std::uint64_t seed, int folds = 4) {
  if (data.size() < 8) throw Error(ErrorKind::InvalidArgument, "at least 8 examples are needed for 4 folds");
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "hyperparameter grid is empty");
  const auto fold_of = stratified_folds(data.labels, data.class_count, folds, seed);
  std::vector<FoldSplit> splits;
  ProtocolResult<Setting> out;
  for (int f = 0; f < folds; ++f) {
    splits.push_back(fold_split(fold_of, f));
    const auto& val = splits.back().validation;
    const int first = data.labels[val.front()];
    if (std::all_of(val.begin(), val.end(), [&](std::size_t i) { return data.labels[i] == first; })) {
      log_degenerate_fold(f, first);
      ++out.degenerate_folds;
    }
  }
  out.mean_accuracy.assign(grid.size(), 0.0);
  out.folds.assign(grid.size(), std::vector<double>(static_cast<std::size_t>(folds), 0.0));
  for (std::size_t s = 0; s < grid.size(); ++s) {
    double sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      const auto& split = splits[static_cast<std::size_t>(f)];
      const auto predicted = classifier(data, split, grid[s]);
      std::vector<int> truth;
      truth.reserve(split.validation.size());
      for (auto i : split.validation) truth.push_back(data.labels[i]);
      const double acc = accuracy(predicted, truth).accuracy;
      out.folds[s][static_cast<std::size_t>(f)] = acc;
      sum += acc;
    }
    out.mean_accuracy[s] = sum / folds;
    if (s == 0 || out.mean_accuracy[s] > out.accuracy) {
      out.chosen = s;
      out.accuracy = out.mean_accuracy[s];
    }
  }
  out.setting = grid[out.chosen];
  return out;
}

struct DatasetResult {
  std::string dataset;
  std::string classifier;
  std::size_t correct = 0;
  std::size_t n_eval = 0;
  double accuracy = 0.0;  // filled by build_report
  Interval ci;            // filled by build_report
};

struct ClassifierSummary {
  std::string classifier;
  double friedman_rank = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  MeanStd pma;
  MeanStd accuracy;  // percent
  std::vector<ProfilePoint> profile;
};

struct EvalReport {
  std::vector<DatasetResult> rows;
  std::vector<ClassifierSummary> classifiers;
};

/// Builds the aggregate block. Datasets and classifiers are taken in order
/// of first appearance; every (dataset, classifier) cell must be present.
EvalReport build_report(std::vector<DatasetResult> rows, double conf = 0.95);

/// One row per dataset per classifier; percentages to one decimal, CI
/// bounds to two.
std::string report_csv(const EvalReport& report);
std::string report_json(const EvalReport& report);
void write_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace ckernel
