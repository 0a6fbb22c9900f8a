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

#include "ckernel/errors.hpp"
#include "ckernel/gram.hpp"

namespace ckernel {

namespace {
constexpr std::uint32_t kGramVersion = 1;
}

std::vector<std::uint8_t> encode_gram(const GramMatrix& gram, const Digest& arch_hash) {
  if (gram.row_ids.size() != static_cast<std::size_t>(gram.rows()) ||
      gram.col_ids.size() != static_cast<std::size_t>(gram.cols())) {
    throw Error(ErrorKind::ShapeMismatch, "gram id lists do not match matrix shape");
  }
  ByteWriter w;
  w.tag("CKGM");
  w.u32(kGramVersion);
  w.bytes(arch_hash);
  w.u32(static_cast<std::uint32_t>(gram.rows()));
  w.u32(static_cast<std::uint32_t>(gram.cols()));
  w.u8(gram.symmetric ? 1 : 0);
  w.u8(1);
  for (auto id : gram.row_ids) w.u32(id);
  for (auto id : gram.col_ids) w.u32(id);
  for (Eigen::Index r = 0; r < gram.rows(); ++r) {
    for (Eigen::Index c = 0; c < gram.cols(); ++c) w.f64(gram.values(r, c));
  }
  w.seal();
  return w.data();
}

GramMatrix decode_gram(std::span<const std::uint8_t> bytes, Digest* arch_hash) {
  ByteReader r(verify_sealed(bytes));
  r.expect_tag("CKGM");
  if (r.u32() != kGramVersion) throw Error(ErrorKind::Format, "unsupported gram version");
  auto hash = r.bytes(32);
  if (arch_hash != nullptr) std::copy(hash.begin(), hash.end(), arch_hash->begin());
  const auto rows = r.u32();
  const auto cols = r.u32();
  GramMatrix g;
  g.symmetric = r.u8() != 0;
  const auto dtype = r.u8();
  if (dtype != 0 && dtype != 1) throw Error(ErrorKind::Format, "unknown gram dtype");
  g.row_ids.resize(rows);
  g.col_ids.resize(cols);
  for (auto& id : g.row_ids) id = r.u32();
  for (auto& id : g.col_ids) id = r.u32();
  g.values.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) g.values(i, j) = dtype == 1 ? r.f64() : r.f32();
  }
  if (r.remaining() != 0) throw Error(ErrorKind::Format, "trailing bytes in gram file");
  return g;
}

void write_gram(const std::filesystem::path& path, const GramMatrix& gram, const Digest& arch_hash) {
  write_file_atomic(path, encode_gram(gram, arch_hash));
}

GramMatrix read_gram(const std::filesystem::path& path, Digest* arch_hash) {
  try {
    return decode_gram(read_file(path), arch_hash);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what(), e.location());
  }
}

}  // namespace ckernel
