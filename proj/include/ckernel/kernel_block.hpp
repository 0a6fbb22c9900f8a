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

#include <cstddef>
#include <span>
#include <vector>

#include "ckernel/arch.hpp"

namespace ckernel {

/// Half-open range of example indices into a dataset.
struct BatchRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  friend bool operator==(const BatchRange&, const BatchRange&) = default;
};

/// Non-owning view of images stored as [count, rows, cols, channels].
struct ImageView {
  std::span<const float> pixels;
  Spatial dims;
  int channels = 0;
  BatchRange range;

  std::size_t count() const { return range.size(); }
  std::size_t image_size() const {
    return static_cast<std::size_t>(dims.rows) * dims.cols * channels;
  }
  std::span<const float> image(std::size_t local) const {
    return pixels.subspan(local * image_size(), image_size());
  }
};

/// Tile of the rank-6 kernel tensor K[i,j,k,l,m,n] for images i in range_a
/// and l in range_b. Storage is pair-major, [i][l][j][k][m][n], so that each
/// image pair owns a contiguous (rows*cols)^2 slab; the logical indexing is
/// the usual (i,j,k,l,m,n).
class KernelBlock {
 public:
  KernelBlock() = default;
  KernelBlock(BatchRange a, BatchRange b, Spatial dims, int stage = 0);

  /// Reshapes in place, reusing capacity. Contents are unspecified.
  void reshape(BatchRange a, BatchRange b, Spatial dims, int stage);

  BatchRange range_a() const { return range_a_; }
  BatchRange range_b() const { return range_b_; }
  std::size_t batch_a() const { return range_a_.size(); }
  std::size_t batch_b() const { return range_b_.size(); }
  Spatial dims() const { return dims_; }
  int stage() const { return stage_; }
  void set_stage(int stage) { stage_ = stage; }
  bool is_diagonal() const { return range_a_ == range_b_; }

  std::size_t pixels() const { return static_cast<std::size_t>(dims_.rows) * dims_.cols; }
  std::size_t pair_size() const { return pixels() * pixels(); }

  std::span<float> pair(std::size_t i, std::size_t l) {
    return std::span(values_).subspan((i * batch_b() + l) * pair_size(), pair_size());
  }
  std::span<const float> pair(std::size_t i, std::size_t l) const {
    return std::span(values_).subspan((i * batch_b() + l) * pair_size(), pair_size());
  }

  float& at(std::size_t i, int j, int k, std::size_t l, int m, int n) { return values_[offset(i, j, k, l, m, n)]; }
  float at(std::size_t i, int j, int k, std::size_t l, int m, int n) const {
    return values_[offset(i, j, k, l, m, n)];
  }

  std::span<float> values() { return values_; }
  std::span<const float> values() const { return values_; }

 private:
  std::size_t offset(std::size_t i, int j, int k, std::size_t l, int m, int n) const {
    const std::size_t p1 = static_cast<std::size_t>(j) * dims_.cols + k;
    const std::size_t p2 = static_cast<std::size_t>(m) * dims_.cols + n;
    return (i * batch_b() + l) * pair_size() + p1 * pixels() + p2;
  }

  BatchRange range_a_;
  BatchRange range_b_;
  Spatial dims_;
  int stage_ = 0;
  std::vector<float> values_;
};

/// Per-pixel feature norms A[i,j,k] = sqrt(K[i,j,k,i,j,k]) at one stage,
/// indexed by absolute dataset index.
class DiagCache {
 public:
  DiagCache() = default;
  DiagCache(BatchRange range, Spatial dims);

  BatchRange range() const { return range_; }
  Spatial dims() const { return dims_; }
  std::size_t pixels() const { return static_cast<std::size_t>(dims_.rows) * dims_.cols; }

  std::span<const double> norms(std::size_t image) const {
    return std::span(norms_).subspan((image - range_.begin) * pixels(), pixels());
  }
  std::span<double> norms(std::size_t image) {
    return std::span(norms_).subspan((image - range_.begin) * pixels(), pixels());
  }

 private:
  BatchRange range_;
  Spatial dims_;
  std::vector<double> norms_;
};

}  // namespace ckernel
