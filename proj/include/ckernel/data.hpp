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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ckernel/arch.hpp"
#include "ckernel/binary_io.hpp"
#include "ckernel/kernel_block.hpp"

namespace ckernel {

/// Images stored as [count, rows, cols, channels] floats with integer labels.
struct ImageDataset {
  std::vector<float> pixels;
  Spatial dims;
  int channels = 0;
  std::vector<int> labels;
  int class_count = 0;
  /// Original example ids, carried through subsampling and augmentation.
  std::vector<std::uint32_t> ids;
  /// Source and preprocessing chain, e.g. "cifar10:data_batch_1.bin|standardize|zca".
  std::string provenance;

  std::size_t size() const { return labels.size(); }
  std::size_t image_size() const { return static_cast<std::size_t>(dims.rows) * dims.cols * channels; }
  std::span<const float> image(std::size_t i) const {
    return std::span(pixels).subspan(i * image_size(), image_size());
  }
  std::span<float> image(std::size_t i) { return std::span(pixels).subspan(i * image_size(), image_size()); }
  ImageView view(BatchRange range) const;
  ImageView view() const { return view({0, size()}); }

  /// sha256 over shape, labels and pixel bytes.
  Digest content_hash() const;
  /// Throws Error(Format) if sizes, labels or pixel values are inconsistent.
  void validate() const;
  void append_provenance(const std::string& step);
};

struct TabularDataset {
  Eigen::MatrixXd rows;  // N x d
  std::vector<int> labels;
  int class_count = 0;
  std::vector<std::string> class_names;
  /// Optional fold assignment in [0, k), one per row.
  std::vector<int> folds;

  std::size_t size() const { return labels.size(); }
};

// ---- dataset files ---------------------------------------------------------

/// "CKDS" file: magic, version u32, rows/cols/channels/count/classes u32,
/// ids u32[], labels u32[], pixels f32[], provenance (u32 length + bytes),
/// CRC32. Written by `prep`, read by the later stages.
void write_dataset(const std::filesystem::path& path, const ImageDataset& data);
ImageDataset read_dataset(const std::filesystem::path& path);

// ---- loaders ---------------------------------------------------------------

/// One CIFAR-10 binary batch file: 3073-byte records (label, 1024 R, 1024 G,
/// 1024 B, row-major). Pixels are scaled to [0, 1].
ImageDataset load_cifar10_file(const std::filesystem::path& file);

enum class CifarSplit { Train, Test };
/// Directory with data_batch_{1..5}.bin / test_batch.bin.
ImageDataset load_cifar10(const std::filesystem::path& dir, CifarSplit split);

/// IDX pair (magics 0x803 / 0x801, big-endian dims). Pixels scaled to [0, 1].
ImageDataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

struct CsvOptions {
  bool header = false;
  /// Column holding the class label; negative counts from the end.
  int label_column = -1;
};

/// Numeric CSV with one categorical label column. Labels are mapped to ints
/// by first appearance. Throws Error(Parse) with the 1-based line on ragged
/// rows or non-numeric feature cells.
TabularDataset load_csv_tabular(const std::filesystem::path& path, const CsvOptions& options = {});
TabularDataset parse_csv_tabular(std::string_view text, const CsvOptions& options = {});

// ---- preprocessing ---------------------------------------------------------

inline constexpr double kStdFloor = 1e-8;

struct Moments {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population std, floored at kStdFloor
};

/// Per-channel moments for images, per-feature moments for tabular data.
Moments fit_moments(const ImageDataset& data);
Moments fit_moments(const TabularDataset& data);
ImageDataset apply_moments(const Moments& m, ImageDataset data);
TabularDataset apply_moments(const Moments& m, TabularDataset data);
ImageDataset standardize(ImageDataset data);
TabularDataset standardize(TabularDataset data);

struct ZcaTransform {
  Eigen::VectorXd mean;
  Eigen::MatrixXd whitening;  // symmetric d x d
  double epsilon = 0.0;
  Eigen::VectorXd eigenvalues;  // of the sample covariance, ascending
};

/// Fits U diag((lambda + eps)^-1/2) U^T on mean-centered flattened images.
/// Default eps is 1e-5 * trace(cov) / d. Directions with lambda + eps == 0
/// are dropped (zero scale).
ZcaTransform zca_fit(const ImageDataset& data, std::optional<double> epsilon = std::nullopt);
ImageDataset zca_apply(const ZcaTransform& zca, ImageDataset data);

/// Originals followed by horizontal mirrors, labels and ids duplicated.
ImageDataset flip_augment(const ImageDataset& data);
ImageDataset flip_horizontal(const ImageDataset& data);

/// Zero border, content centered with any odd margin pixel going to the
/// bottom/right.
ImageDataset pad_to(const ImageDataset& data, Spatial target);

/// n / class_count indices per class drawn without replacement, sorted
/// ascending. Indices in `exclude` are never drawn.
std::vector<std::size_t> balanced_indices(std::span<const int> labels, int class_count, std::size_t n,
                                          std::uint64_t seed, std::span<const std::size_t> exclude = {});
ImageDataset subsample_balanced(const ImageDataset& data, std::size_t n, std::uint64_t seed);
ImageDataset select(const ImageDataset& data, std::span<const std::size_t> indices);

/// Flattened [N, rows*cols*channels] matrix, the tabular view of images.
Eigen::MatrixXd flatten(const ImageDataset& data);
/// One-hot label matrix, N x class_count.
Eigen::MatrixXd one_hot(std::span<const int> labels, int class_count);

}  // namespace ckernel
