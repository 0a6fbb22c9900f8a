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

#include "ckernel/kernel_block.hpp"

#include "ckernel/errors.hpp"

namespace ckernel {

KernelBlock::KernelBlock(BatchRange a, BatchRange b, Spatial dims, int stage) {
  reshape(a, b, dims, stage);
  std::fill(values_.begin(), values_.end(), 0.0f);
}

void KernelBlock::reshape(BatchRange a, BatchRange b, Spatial dims, int stage) {
  if (a.end < a.begin || b.end < b.begin) throw Error(ErrorKind::InvalidArgument, "inverted batch range");
  if (dims.rows < 1 || dims.cols < 1) throw Error(ErrorKind::InvalidArgument, "spatial dims must be positive");
  range_a_ = a;
  range_b_ = b;
  dims_ = dims;
  stage_ = stage;
  values_.resize(a.size() * b.size() * pair_size());
}

DiagCache::DiagCache(BatchRange range, Spatial dims)
    : range_(range), dims_(dims), norms_(range.size() * static_cast<std::size_t>(dims.rows) * dims.cols, 0.0) {}

}  // namespace ckernel
