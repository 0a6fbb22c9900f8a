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

#include "ckernel/tile_cache.hpp"

#include <iostream>

#include "ckernel/errors.hpp"

namespace ckernel {

namespace {
constexpr std::uint8_t kDtypeF32 = 0;
constexpr std::uint8_t kDtypeF64 = 1;
}  // namespace

Digest TileKey::content_hash() const {
  Sha256 h;
  h.update("ckernel-tile-v1");
  h.update(std::span(arch_hash));
  h.update(std::span(dataset_a));
  h.update(std::span(dataset_b));
  for (auto v : {range_a.begin, range_a.end, range_b.begin, range_b.end}) h.update_pod(static_cast<std::uint64_t>(v));
  h.update_pod(precision);
  return h.finish();
}

std::vector<std::uint8_t> encode_tile(const TileKey& key, const TileValues& values) {
  ByteWriter w;
  w.tag("CKTL");
  w.u32(TileCache::kVersion);
  w.bytes(key.arch_hash);
  w.u32(static_cast<std::uint32_t>(key.range_a.begin));
  w.u32(static_cast<std::uint32_t>(key.range_a.end));
  w.u32(static_cast<std::uint32_t>(key.range_b.begin));
  w.u32(static_cast<std::uint32_t>(key.range_b.end));
  w.u8(kDtypeF64);
  for (double v : values) w.f64(v);
  w.seal();
  return w.data();
}

TileValues decode_tile(std::span<const std::uint8_t> bytes, const TileKey& key) {
  ByteReader r(verify_sealed(bytes));
  r.expect_tag("CKTL");
  if (r.u32() != TileCache::kVersion) throw Error(ErrorKind::Format, "unsupported tile version");
  auto hash = r.bytes(32);
  if (!std::equal(hash.begin(), hash.end(), key.arch_hash.begin())) {
    throw Error(ErrorKind::CacheCorrupt, "tile arch hash mismatch");
  }
  const std::uint32_t coords[4] = {r.u32(), r.u32(), r.u32(), r.u32()};
  if (coords[0] != key.range_a.begin || coords[1] != key.range_a.end || coords[2] != key.range_b.begin ||
      coords[3] != key.range_b.end) {
    throw Error(ErrorKind::CacheCorrupt, "tile coordinates mismatch");
  }
  const std::uint8_t dtype = r.u8();
  const std::size_t count = key.range_a.size() * key.range_b.size();
  TileValues values(count);
  if (dtype == kDtypeF64) {
    for (auto& v : values) v = r.f64();
  } else if (dtype == kDtypeF32) {
    for (auto& v : values) v = r.f32();
  } else {
    throw Error(ErrorKind::Format, "unknown dtype tag");
  }
  if (r.remaining() != 0) throw Error(ErrorKind::CacheCorrupt, "trailing bytes in tile payload");
  return values;
}

TileCache::TileCache(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::filesystem::path TileCache::path_for(const TileKey& key) const {
  return dir_ / (to_hex(key.content_hash()) + ".cktl");
}

std::optional<TileValues> TileCache::get(const TileKey& key) {
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    return decode_tile(read_file(path), key);
  } catch (const Error& e) {
    ++corrupt_;
    std::cerr << "warning: discarding cached tile " << path.filename().string() << ": " << e.what() << '\n';
    return std::nullopt;
  }
}

void TileCache::put(const TileKey& key, const TileValues& values) {
  write_file_atomic(path_for(key), encode_tile(key, values));
}

}  // namespace ckernel
