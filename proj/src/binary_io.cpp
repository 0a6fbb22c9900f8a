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

#include "ckernel/binary_io.hpp"

#include <openssl/evp.h>
#include <unistd.h>
#include <zlib.h>

#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ckernel/errors.hpp"

namespace ckernel {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr);
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256::update(std::span<const std::uint8_t> bytes) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), bytes.data(), bytes.size());
}

void Sha256::update(std::string_view text) {
  update(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Digest Sha256::finish() {
  Digest out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len);
  return out;
}

Digest sha256(std::span<const std::uint8_t> bytes) {
  Sha256 h;
  h.update(bytes);
  return h.finish();
}

Digest sha256(std::string_view text) {
  Sha256 h;
  h.update(text);
  return h.finish();
}

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for large payloads.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = ::crc32(crc, bytes.data() + pos, chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {
template <class T>
void put_raw(std::vector<std::uint8_t>& buf, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  buf.insert(buf.end(), raw, raw + sizeof(T));
}
}  // namespace

void ByteWriter::u32(std::uint32_t v) { put_raw(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { put_raw(buf_, v); }
void ByteWriter::f32(float v) { put_raw(buf_, v); }
void ByteWriter::f64(double v) { put_raw(buf_, v); }
void ByteWriter::seal() { u32(crc32(buf_)); }

std::span<const std::uint8_t> ByteReader::bytes(std::size_t count) {
  if (count > remaining()) {
    throw Error(ErrorKind::Format, "truncated data: need " + std::to_string(count) + " bytes at offset " +
                                       std::to_string(pos_) + ", have " + std::to_string(remaining()));
  }
  auto out = data_.subspan(pos_, count);
  pos_ += count;
  return out;
}

void ByteReader::expect_tag(std::string_view magic) {
  auto got = bytes(magic.size());
  if (!std::equal(got.begin(), got.end(), magic.begin(), magic.end(),
                  [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
    throw Error(ErrorKind::Format, "bad magic, expected '" + std::string(magic) + "'");
  }
}

namespace {
template <class T>
T get_raw(ByteReader& r) {
  T value;
  auto raw = r.bytes(sizeof(T));
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}
}  // namespace

std::uint8_t ByteReader::u8() { return bytes(1)[0]; }
std::uint32_t ByteReader::u32() { return get_raw<std::uint32_t>(*this); }
std::uint64_t ByteReader::u64() { return get_raw<std::uint64_t>(*this); }
float ByteReader::f32() { return get_raw<float>(*this); }
double ByteReader::f64() { return get_raw<double>(*this); }

std::span<const std::uint8_t> verify_sealed(std::span<const std::uint8_t> data) {
  if (data.size() < 4) throw Error(ErrorKind::CacheCorrupt, "file too short for checksum");
  auto body = data.first(data.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, data.data() + body.size(), 4);
  if (stored != crc32(body)) throw Error(ErrorKind::CacheCorrupt, "checksum mismatch");
  return body;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  static std::atomic<std::uint64_t> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ostringstream suffix;
  suffix << ".tmp." << ::getpid() << "." << counter.fetch_add(1);
  auto tmp = path;
  tmp += suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace ckernel
