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

#include "ckernel/engine.hpp"

#include <chrono>
#include <cmath>
#include <mutex>

#include "ckernel/errors.hpp"
#include "ckernel/parallel.hpp"

namespace ckernel {

std::size_t TileJob::pair_count() const {
  const std::size_t n = range_a.size();
  return on_diagonal() ? n * (n + 1) / 2 : range_a.size() * range_b.size();
}

std::vector<TileJob> schedule_tiles(std::size_t rows, std::size_t cols, std::size_t tile, bool symmetric) {
  if (tile < 1) throw Error(ErrorKind::InvalidArgument, "tile must be >= 1");
  if (symmetric && rows != cols) throw Error(ErrorKind::InvalidArgument, "symmetric schedule needs a square grid");
  std::vector<TileJob> jobs;
  for (std::size_t a = 0; a < rows; a += tile) {
    for (std::size_t b = symmetric ? a : 0; b < cols; b += tile) {
      jobs.push_back({{a, std::min(rows, a + tile)}, {b, std::min(cols, b + tile)}, symmetric, TileStatus::Pending});
    }
  }
  return jobs;
}

std::size_t default_tile(Spatial dims, std::size_t budget_bytes) {
  const double pixels = static_cast<double>(dims.rows) * dims.cols;
  const double pair_bytes = 2.0 * pixels * pixels * sizeof(float);
  const auto edge = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(budget_bytes) / pair_bytes)));
  return std::max<std::size_t>(1, std::min<std::size_t>(edge, 64));
}

StageDiagonals compute_stage_diagonals(const ImageDataset& data, const ArchSpec& arch, unsigned threads,
                                       const LayerOperators* operators) {
  const auto& ops = operators != nullptr ? *operators : LayerOperators::exact();
  const auto report = validate_arch(arch, data.dims);
  StageDiagonals out;
  out.per_layer.resize(arch.layers.size());
  for (std::size_t s = 0; s < arch.layers.size(); ++s) {
    if (!arch.layers[s].is_embedding()) continue;
    const Spatial dims = s == 0 ? data.dims : report.stage_dims[s - 1];
    out.per_layer[s] = DiagCache({0, data.size()}, dims);
  }
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const BatchRange self{i, i + 1};
    const auto view = data.view(self);
    KernelBlock cur, next;
    input_kernel_into(view, view, cur);
    for (std::size_t s = 0; s < arch.layers.size(); ++s) {
      const auto& layer = arch.layers[s];
      if (layer.is_embedding()) {
        const auto local = update_diag(cur);
        auto dst = out.per_layer[s].norms(i);
        auto src = local.norms(i);
        std::copy(src.begin(), src.end(), dst.begin());
        apply_layer(ops, layer, cur, &local, &local, next);
      } else {
        apply_layer(ops, layer, cur, nullptr, nullptr, next);
      }
      std::swap(cur, next);
    }
  });
  return out;
}

TileValues compute_tile(const ImageDataset& a, const ImageDataset& b, const ArchSpec& arch,
                        const StageDiagonals& diag_a, const StageDiagonals& diag_b, BatchRange range_a,
                        BatchRange range_b, const LayerOperators& operators) {
  KernelBlock cur, next;
  input_kernel_into(a.view(range_a), b.view(range_b), cur);
  for (std::size_t s = 0; s < arch.layers.size(); ++s) {
    const auto& layer = arch.layers[s];
    if (layer.is_embedding()) {
      apply_layer(operators, layer, cur, &diag_a.per_layer[s], &diag_b.per_layer[s], next);
    } else {
      apply_layer(operators, layer, cur, nullptr, nullptr, next);
    }
    std::swap(cur, next);
  }
  if (cur.dims() != Spatial{1, 1}) throw Error(ErrorKind::NotScalar, "tile did not reduce to 1x1");
  TileValues values(range_a.size() * range_b.size());
  for (std::size_t i = 0; i < range_a.size(); ++i) {
    for (std::size_t l = 0; l < range_b.size(); ++l) values[i * range_b.size() + l] = cur.pair(i, l)[0];
  }
  return values;
}

GramMatrix compose_kernel(const ImageDataset& a, const ImageDataset& b, const ArchSpec& arch,
                          const ComposeOptions& options, ComposeStats* stats) {
  const auto started = std::chrono::steady_clock::now();
  if (a.dims != b.dims || a.channels != b.channels) {
    throw Error(ErrorKind::ShapeMismatch, "datasets differ in image shape");
  }
  const auto report = validate_arch(arch, a.dims);
  if (!report.flattens_to_scalar) {
    throw Error(ErrorKind::NotScalar, "architecture leaves " + std::to_string(report.final_dims.rows) + "x" +
                                          std::to_string(report.final_dims.cols) +
                                          " spatial dims; it must pool down to 1x1");
  }
  const auto& ops = options.operators != nullptr ? *options.operators : LayerOperators::exact();
  const Digest hash_a = a.content_hash();
  const Digest hash_b = &a == &b ? hash_a : b.content_hash();
  const bool symmetric = hash_a == hash_b;
  const Digest arch_hash = sha256(render_arch(arch));
  const std::size_t tile = options.tile > 0 ? options.tile : default_tile(a.dims);

  const StageDiagonals diag_a = compute_stage_diagonals(a, arch, options.threads, &ops);
  const StageDiagonals diag_b_storage = symmetric ? StageDiagonals{} : compute_stage_diagonals(b, arch, options.threads, &ops);
  const StageDiagonals& diag_b = symmetric ? diag_a : diag_b_storage;

  auto jobs = schedule_tiles(a.size(), b.size(), tile, symmetric);
  std::vector<TileValues> results(jobs.size());
  std::mutex progress_mutex;
  ComposeProgress progress{0, jobs.size(), 0};
  std::atomic<std::size_t> computed{0};

  parallel_for(
      jobs.size(), options.threads,
      [&](std::size_t j) {
        auto& job = jobs[j];
        TileKey key{arch_hash, hash_a, hash_b, job.range_a, job.range_b, 0};
        bool from_cache = false;
        if (options.cache != nullptr) {
          if (auto hit = options.cache->get(key)) {
            results[j] = std::move(*hit);
            from_cache = true;
          }
        }
        if (!from_cache) {
          try {
            results[j] = compute_tile(a, b, arch, diag_a, diag_b, job.range_a, job.range_b, ops);
          } catch (...) {
            job.status = TileStatus::Failed;
            throw;
          }
          if (options.cache != nullptr) options.cache->put(key, results[j]);
          ++computed;
        }
        job.status = TileStatus::Done;
        std::lock_guard lock(progress_mutex);
        ++progress.tiles_done;
        if (from_cache) ++progress.tiles_cached;
        if (options.on_progress) options.on_progress(progress);
      },
      options.cancel);

  for (const auto& job : jobs) {
    if (job.status != TileStatus::Done) {
      throw Error(ErrorKind::Interrupted, std::to_string(progress.tiles_done) + " of " + std::to_string(jobs.size()) +
                                              " tiles finished before cancellation");
    }
  }

  GramMatrix gram;
  gram.values.resize(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  gram.symmetric = symmetric;
  gram.row_ids = a.ids;
  gram.col_ids = b.ids;
  if (gram.row_ids.size() != a.size()) {
    gram.row_ids.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) gram.row_ids[i] = static_cast<std::uint32_t>(i);
  }
  if (gram.col_ids.size() != b.size()) {
    gram.col_ids.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) gram.col_ids[i] = static_cast<std::uint32_t>(i);
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& job = jobs[j];
    const auto& vals = results[j];
    for (std::size_t i = 0; i < job.range_a.size(); ++i) {
      for (std::size_t l = 0; l < job.range_b.size(); ++l) {
        const auto r = static_cast<Eigen::Index>(job.range_a.begin + i);
        const auto c = static_cast<Eigen::Index>(job.range_b.begin + l);
        if (job.on_diagonal() && c < r) continue;
        const double v = vals[i * job.range_b.size() + l];
        if (!std::isfinite(v)) throw Error(ErrorKind::Format, "non-finite kernel value");
        gram.values(r, c) = v;
        if (symmetric) gram.values(c, r) = v;
      }
    }
  }

  if (stats != nullptr) {
    stats->tiles_total = jobs.size();
    stats->tiles_cached = progress.tiles_cached;
    stats->tiles_computed = computed;
    stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return gram;
}

}  // namespace ckernel
