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
#include "ckernel/data.hpp"
#include "ckernel/errors.hpp"

namespace ckernel {

namespace {
constexpr std::uint32_t kDatasetVersion = 1;
}

void write_dataset(const std::filesystem::path& path, const ImageDataset& data) {
  data.validate();
  ByteWriter w;
  w.tag("CKDS");
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(data.dims.rows));
  w.u32(static_cast<std::uint32_t>(data.dims.cols));
  w.u32(static_cast<std::uint32_t>(data.channels));
  w.u32(static_cast<std::uint32_t>(data.size()));
  w.u32(static_cast<std::uint32_t>(data.class_count));
  for (std::size_t i = 0; i < data.size(); ++i) {
    w.u32(data.ids.empty() ? static_cast<std::uint32_t>(i) : data.ids[i]);
  }
  for (int y : data.labels) w.u32(static_cast<std::uint32_t>(y));
  for (float p : data.pixels) w.f32(p);
  w.u32(static_cast<std::uint32_t>(data.provenance.size()));
  w.tag(data.provenance);
  w.seal();
  write_file_atomic(path, w.data());
}

ImageDataset read_dataset(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader r(verify_sealed(bytes));
  r.expect_tag("CKDS");
  if (r.u32() != kDatasetVersion) throw Error(ErrorKind::Format, path.string() + ": unsupported dataset version");
  ImageDataset d;
  d.dims.rows = static_cast<int>(r.u32());
  d.dims.cols = static_cast<int>(r.u32());
  d.channels = static_cast<int>(r.u32());
  const std::uint32_t n = r.u32();
  d.class_count = static_cast<int>(r.u32());
  if (static_cast<std::size_t>(n) * (8 + d.image_size() * 4) > r.remaining()) {
    throw Error(ErrorKind::Format, path.string() + ": header counts exceed file size");
  }
  d.ids.resize(n);
  for (auto& id : d.ids) id = r.u32();
  d.labels.resize(n);
  for (auto& y : d.labels) y = static_cast<int>(r.u32());
  d.pixels.resize(static_cast<std::size_t>(n) * d.image_size());
  for (auto& p : d.pixels) p = r.f32();
  const auto len = r.u32();
  const auto text = r.bytes(len);
  d.provenance.assign(text.begin(), text.end());
  if (r.remaining() != 0) throw Error(ErrorKind::Format, path.string() + ": trailing bytes");
  d.validate();
  return d;
}

}  // namespace ckernel
