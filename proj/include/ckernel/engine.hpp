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
#include <cstddef>
#include <functional>
#include <vector>

#include "ckernel/arch.hpp"
#include "ckernel/data.hpp"
#include "ckernel/gram.hpp"
#include "ckernel/kernel_ops.hpp"
#include "ckernel/tile_cache.hpp"

namespace ckernel {

enum class TileStatus { Pending, Done, Failed };

/// A rectangle of image pairs. In symmetric mode a tile on the diagonal
/// (range_a == range_b) covers only the pairs with a <= b.
struct TileJob {
  BatchRange range_a;
  BatchRange range_b;
  bool symmetric = false;
  TileStatus status = TileStatus::Pending;

  bool on_diagonal() const { return symmetric && range_a == range_b; }
  std::size_t pair_count() const;
};

/// Row-major grid of tiles; symmetric mode keeps only batch_a <= batch_b.
std::vector<TileJob> schedule_tiles(std::size_t rows, std::size_t cols, std::size_t tile, bool symmetric);

/// Tile edge such that one tile's two working blocks stay within `budget_bytes`.
std::size_t default_tile(Spatial dims, std::size_t budget_bytes = std::size_t{512} << 20);

struct ComposeProgress {
  std::size_t tiles_done = 0;
  std::size_t tiles_total = 0;
  std::size_t tiles_cached = 0;
};

struct ComposeOptions {
  std::size_t tile = 0;  // 0 = default_tile()
  unsigned threads = 0;  // 0 = hardware concurrency
  TileCache* cache = nullptr;
  const LayerOperators* operators = nullptr;  // nullptr = exact operators
  std::function<void(const ComposeProgress&)> on_progress;
  /// When set, workers stop taking new tiles; compose throws Interrupted
  /// after finished tiles are persisted.
  const std::atomic<bool>* cancel = nullptr;
};

struct ComposeStats {
  std::size_t tiles_total = 0;
  std::size_t tiles_cached = 0;
  std::size_t tiles_computed = 0;
  double seconds = 0.0;
};

/// Per-stage norm caches for every image of a dataset, computed by running
/// the layers on each image paired with itself. Entry s is set (non-empty)
/// when layer s is an embedding.
struct StageDiagonals {
  std::vector<DiagCache> per_layer;
};

StageDiagonals compute_stage_diagonals(const ImageDataset& data, const ArchSpec& arch, unsigned threads = 0,
                                       const LayerOperators* operators = nullptr);

/// Runs the input kernel and every layer on one tile, returning the final
/// 1x1 values row-major over (range_a x range_b).
TileValues compute_tile(const ImageDataset& a, const ImageDataset& b, const ArchSpec& arch,
                        const StageDiagonals& diag_a, const StageDiagonals& diag_b, BatchRange range_a,
                        BatchRange range_b, const LayerOperators& operators);

/// Gram matrix with rows from `a` and columns from `b`. The arch must reduce
/// the images to 1x1 (Error(NotScalar) otherwise). When a and b have the same
/// content only upper-triangular tiles are computed and mirrored.
GramMatrix compose_kernel(const ImageDataset& a, const ImageDataset& b, const ArchSpec& arch,
                          const ComposeOptions& options = {}, ComposeStats* stats = nullptr);

}  // namespace ckernel
