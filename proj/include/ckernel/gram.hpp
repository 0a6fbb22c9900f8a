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
#include <vector>

#include "ckernel/binary_io.hpp"

namespace ckernel {

/// Dense matrix of final kernel values: rows are query examples, columns are
/// reference examples.
struct GramMatrix {
  Eigen::MatrixXd values;
  std::vector<std::uint32_t> row_ids;
  std::vector<std::uint32_t> col_ids;
  bool symmetric = false;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// "CKGM" file: magic, version u32, arch hash (32 bytes), rows u32, cols u32,
/// symmetric u8, dtype u8 (1 = f64), row ids, col ids (u32 each), row-major
/// payload, CRC32. All little-endian.
void write_gram(const std::filesystem::path& path, const GramMatrix& gram, const Digest& arch_hash);
GramMatrix read_gram(const std::filesystem::path& path, Digest* arch_hash = nullptr);

std::vector<std::uint8_t> encode_gram(const GramMatrix& gram, const Digest& arch_hash);
GramMatrix decode_gram(std::span<const std::uint8_t> bytes, Digest* arch_hash = nullptr);

}  // namespace ckernel
