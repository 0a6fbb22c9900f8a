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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ckernel {

enum class DatasetType { Cifar10, Mnist, Csv };
enum class KernelKind { Arch, Gaussian, Linear };
enum class Validation { Loo, Holdout };

struct DatasetConfig {
  DatasetType type = DatasetType::Cifar10;
  std::filesystem::path path;         // cifar10 directory or csv file
  std::filesystem::path images;       // mnist training images
  std::filesystem::path labels;       // mnist training labels
  std::filesystem::path test_images;  // optional; otherwise test is drawn from the training pool
  std::filesystem::path test_labels;
  std::size_t train_n = 0;  // 0 = everything
  std::size_t test_n = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> preprocess;  // standardize | zca | flip, applied in order
  int pad = 0;                          // square target side, 0 = none
  std::optional<double> zca_epsilon;
  bool csv_header = false;
  int csv_label_column = -1;
};

struct KernelConfig {
  KernelKind kind = KernelKind::Arch;
  std::filesystem::path arch;
  std::optional<double> gamma;  // Gaussian length scale; tuned when absent
  std::size_t tuning_n = 1000;  // rows used to tune the Gaussian bandwidth
};

struct SolveConfig {
  std::vector<double> lambdas;
  double tilt = 0.0;
  Validation validation = Validation::Loo;
  std::size_t holdout_n = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::size_t tile = 0;
  std::filesystem::path out_dir = "out";
  std::filesystem::path cache_dir = "cache";
  DatasetConfig dataset;
  KernelConfig kernel;
  SolveConfig solve;
  std::filesystem::path source;  // the config file itself
};

/// Parses INI text with sections [experiment], [dataset], [kernel] and
/// [solve]. Relative paths resolve against `base_dir`. Unknown sections or
/// keys are errors (Error(Parse) with the line where known).
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks that referenced inputs exist and the combination is usable; throws
/// Error(InvalidArgument).
void validate_config(const ExperimentConfig& config);

std::string to_string(DatasetType type);
std::string to_string(KernelKind kind);

}  // namespace ckernel
