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
#include <vector>

#include "ckernel/binary_io.hpp"
#include "ckernel/kernel_block.hpp"

namespace ckernel {

/// Identifies one completed tile of a Gram computation.
struct TileKey {
  Digest arch_hash{};     // sha256 of the canonical arch text
  Digest dataset_a{};     // content hash of the row dataset
  Digest dataset_b{};     // content hash of the column dataset
  BatchRange range_a;
  BatchRange range_b;
  std::uint8_t precision = 0;  // storage precision of the pipeline, 0 = f32

  /// File-name hash over every field.
  Digest content_hash() const;
};

/// Final tile values, row-major over (range_a x range_b).
using TileValues = std::vector<double>;

/// On-disk cache of completed tiles ("CKTL" files). Thread-safe: distinct
/// keys map to distinct files and writes are atomic renames.
class TileCache {
 public:
  static constexpr std::uint32_t kVersion = 1;

  explicit TileCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const TileKey& key) const;

  /// Miss on absence; a corrupt or mismatched file is logged and reported as
  /// a miss so the tile gets recomputed.
  std::optional<TileValues> get(const TileKey& key);
  void put(const TileKey& key, const TileValues& values);

  std::size_t corrupt_count() const { return corrupt_; }

 private:
  std::filesystem::path dir_;
  std::atomic<std::size_t> corrupt_{0};
};

std::vector<std::uint8_t> encode_tile(const TileKey& key, const TileValues& values);
/// Throws Error(CacheCorrupt / Format) on any inconsistency with `key`.
TileValues decode_tile(std::span<const std::uint8_t> bytes, const TileKey& key);

}  // namespace ckernel
