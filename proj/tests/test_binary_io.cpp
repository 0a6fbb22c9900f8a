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

#include "doctest.h"

#include <filesystem>

#include "ckernel/binary_io.hpp"
#include "ckernel/errors.hpp"

using namespace ckernel;

TEST_CASE("sha256 and crc32 known answers") {
  CHECK(to_hex(sha256(std::string_view("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const std::string text = "123456789";
  CHECK(crc32(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())) == 0xCBF43926u);
}

TEST_CASE("incremental hash equals one-shot hash") {
  Sha256 h;
  h.update(std::string_view("ab"));
  h.update(std::string_view("c"));
  CHECK(h.finish() == sha256(std::string_view("abc")));
}

TEST_CASE("writer and reader round trip little-endian values") {
  ByteWriter w;
  w.tag("TEST");
  w.u8(7);
  w.u32(0x01020304u);
  w.u64(0x0102030405060708ull);
  w.f32(1.5f);
  w.f64(-2.25);
  CHECK(w.data()[5] == 0x04);  // little-endian u32
  w.seal();
  ByteReader r(verify_sealed(w.data()));
  r.expect_tag("TEST");
  CHECK(r.u8() == 7);
  CHECK(r.u32() == 0x01020304u);
  CHECK(r.u64() == 0x0102030405060708ull);
  CHECK(r.f32() == 1.5f);
  CHECK(r.f64() == -2.25);
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.u8(), Error);
}

TEST_CASE("sealed buffers detect corruption") {
  ByteWriter w;
  w.tag("DATA");
  w.u32(42);
  w.seal();
  auto bytes = w.data();
  bytes[4] ^= 0x01;
  try {
    verify_sealed(bytes);
    FAIL("expected CacheCorrupt");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CacheCorrupt);
  }
}

TEST_CASE("atomic write replaces the target") {
  const auto dir = std::filesystem::temp_directory_path() / "ckernel_io_test";
  std::filesystem::create_directories(dir);
  const std::vector<std::uint8_t> a{1, 2, 3}, b{4, 5};
  write_file_atomic(dir / "f.bin", a);
  write_file_atomic(dir / "f.bin", b);
  CHECK(read_file(dir / "f.bin") == b);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("derive_seed separates streams deterministically") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
