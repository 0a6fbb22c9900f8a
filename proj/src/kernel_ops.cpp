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

#include "ckernel/kernel_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ckernel/errors.hpp"

namespace ckernel {

namespace {

constexpr double kPi = std::numbers::pi;

void check_same_layout(const ImageView& a, const ImageView& b) {
  if (a.dims != b.dims || a.channels != b.channels) {
    throw Error(ErrorKind::ShapeMismatch, "image batches differ in spatial dims or channel count");
  }
  if (a.pixels.size() < a.count() * a.image_size() || b.pixels.size() < b.count() * b.image_size()) {
    throw Error(ErrorKind::ShapeMismatch, "image view shorter than its declared range");
  }
}

void check_diag(const KernelBlock& in, const DiagCache& diag, BatchRange range) {
  if (diag.dims() != in.dims()) throw Error(ErrorKind::ShapeMismatch, "diag cache stage dims differ from block");
  if (range.size() > 0 && (!diag.range().contains(range.begin) || range.end > diag.range().end)) {
    throw Error(ErrorKind::ShapeMismatch, "diag cache does not cover block range");
  }
}

std::vector<double>& scratch() {
  thread_local std::vector<double> buf;
  return buf;
}

template <class Fn>
void embed_into(const KernelBlock& in, const DiagCache& diag_a, const DiagCache& diag_b, KernelBlock& out, Fn fn) {
  check_diag(in, diag_a, in.range_a());
  check_diag(in, diag_b, in.range_b());
  out.reshape(in.range_a(), in.range_b(), in.dims(), in.stage() + 1);
  const std::size_t p = in.pixels();
  for (std::size_t i = 0; i < in.batch_a(); ++i) {
    auto na = diag_a.norms(in.range_a().begin + i);
    for (std::size_t l = 0; l < in.batch_b(); ++l) {
      auto nb = diag_b.norms(in.range_b().begin + l);
      auto src = in.pair(i, l);
      auto dst = out.pair(i, l);
      for (std::size_t x = 0; x < p; ++x) {
        const double a = na[x];
        const float* s = src.data() + x * p;
        float* d = dst.data() + x * p;
        const double* b = nb.data();
        for (std::size_t y = 0; y < p; ++y) d[y] = static_cast<float>(fn(static_cast<double>(s[y]), a * b[y]));
      }
    }
  }
}

inline double relu_from_product(double k, double prod) {
  const double safe = prod > 0.0 ? prod : 1.0;
  double rho = k / safe;
  rho = rho > 1.0 ? 1.0 : (rho < -1.0 ? -1.0 : rho);
  const double theta = fast_acos(rho);
  const double value = prod / kPi * (std::sqrt(1.0 - rho * rho) + (kPi - theta) * rho);
  return prod > 0.0 ? value : 0.0;
}

inline double gauss_from_product(double k, double prod) {
  const double safe = prod > 0.0 ? prod : 1.0;
  double rho = k / safe;
  rho = rho > 1.0 ? 1.0 : (rho < -1.0 ? -1.0 : rho);
  const double value = prod * std::exp(rho - 1.0);
  return prod > 0.0 ? value : 0.0;
}

}  // namespace

double fast_acos(double x) {
  // Abramowitz & Stegun 4.4.46 on |x|, reflected for negative arguments.
  const double ax = x < 0.0 ? -x : x;
  double poly = -0.0012624911;
  poly = poly * ax + 0.0066700901;
  poly = poly * ax - 0.0170881256;
  poly = poly * ax + 0.0308918810;
  poly = poly * ax - 0.0501743046;
  poly = poly * ax + 0.0889789874;
  poly = poly * ax - 0.2145988016;
  poly = poly * ax + 1.5707963050;
  const double r = std::sqrt(1.0 - ax) * poly;
  return x < 0.0 ? kPi - r : r;
}

double relu_kernel_value(double k, double norm_a, double norm_b) {
  const double prod = norm_a * norm_b;
  if (!(prod > 0.0)) return 0.0;
  const double rho = std::clamp(k / prod, -1.0, 1.0);
  const double theta = std::acos(rho);
  return prod / kPi * (std::sin(theta) + (kPi - theta) * std::cos(theta));
}

double gauss_kernel_value(double k, double norm_a, double norm_b) {
  const double prod = norm_a * norm_b;
  if (!(prod > 0.0)) return 0.0;
  const double rho = std::clamp(k / prod, -1.0, 1.0);
  return prod * std::exp(rho - 1.0);
}

void input_kernel_into(const ImageView& a, const ImageView& b, KernelBlock& out) {
  check_same_layout(a, b);
  out.reshape(a.range, b.range, a.dims, 0);
  const std::size_t p = out.pixels();
  const int ch = a.channels;
  for (std::size_t i = 0; i < a.count(); ++i) {
    auto xa = a.image(i);
    for (std::size_t l = 0; l < b.count(); ++l) {
      auto xb = b.image(l);
      auto dst = out.pair(i, l);
      for (std::size_t u = 0; u < p; ++u) {
        const float* pu = xa.data() + u * ch;
        for (std::size_t v = 0; v < p; ++v) {
          const float* pv = xb.data() + v * ch;
          double acc = 0.0;
          for (int c = 0; c < ch; ++c) acc += static_cast<double>(pu[c]) * pv[c];
          dst[u * p + v] = static_cast<float>(acc);
        }
      }
    }
  }
}

KernelBlock input_kernel(const ImageView& a, const ImageView& b) {
  KernelBlock out;
  input_kernel_into(a, b, out);
  return out;
}

void conv_into(const KernelBlock& in, int w, KernelBlock& out) {
  if (w < 1) throw Error(ErrorKind::InvalidArgument, "conv half-width must be >= 1");
  out.reshape(in.range_a(), in.range_b(), in.dims(), in.stage() + 1);
  const int nr = in.dims().rows;
  const int nc = in.dims().cols;
  const std::size_t p = in.pixels();
  auto& tmp = scratch();
  tmp.resize(in.pair_size());
  // Row offset of pixel (r, c) within a pair slab: (r * nc + c) * p, and the
  // second pixel (m, n) adds m * nc + n.
  auto idx = [&](int j, int k, int m, int n) {
    return (static_cast<std::size_t>(j) * nc + k) * p + static_cast<std::size_t>(m) * nc + n;
  };
  std::vector<double> acc(static_cast<std::size_t>(nc));
  for (std::size_t i = 0; i < in.batch_a(); ++i) {
    for (std::size_t l = 0; l < in.batch_b(); ++l) {
      const float* src = in.pair(i, l).data();
      float* dst = out.pair(i, l).data();
      // Row pass: shift (j, m) together by dx.
      std::fill(tmp.begin(), tmp.end(), 0.0);
      for (int j = 0; j < nr; ++j) {
        for (int dx = -w; dx <= w; ++dx) {
          const int js = j + dx;
          if (js < 0 || js >= nr) continue;
          for (int k = 0; k < nc; ++k) {
            const int m_lo = std::max(0, -dx);
            const int m_hi = std::min(nr, nr - dx);
            for (int m = m_lo; m < m_hi; ++m) {
              const float* s = src + idx(js, k, m + dx, 0);
              double* t = tmp.data() + idx(j, k, m, 0);
              for (int n = 0; n < nc; ++n) t[n] += s[n];
            }
          }
        }
      }
      // Column pass: shift (k, n) together by dy.
      for (int j = 0; j < nr; ++j) {
        for (int k = 0; k < nc; ++k) {
          for (int m = 0; m < nr; ++m) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int dy = -w; dy <= w; ++dy) {
              const int ks = k + dy;
              if (ks < 0 || ks >= nc) continue;
              const double* t = tmp.data() + idx(j, ks, m, 0);
              const int n_lo = std::max(0, -dy);
              const int n_hi = std::min(nc, nc - dy);
              for (int n = n_lo; n < n_hi; ++n) acc[n] += t[n + dy];
            }
            float* d = dst + idx(j, k, m, 0);
            for (int n = 0; n < nc; ++n) d[n] = static_cast<float>(acc[n]);
          }
        }
      }
    }
  }
}

KernelBlock conv(const KernelBlock& in, int w) {
  KernelBlock out;
  conv_into(in, w, out);
  return out;
}

void pool_into(const KernelBlock& in, int row_width, int col_width, KernelBlock& out) {
  const int nr = in.dims().rows;
  const int nc = in.dims().cols;
  if (row_width < 1 || col_width < 1 || nr % row_width != 0 || nc % col_width != 0) {
    throw Error(ErrorKind::PoolIndivisible, "spatial dims " + std::to_string(nr) + "x" + std::to_string(nc) +
                                                " not divisible by pool " + std::to_string(row_width) + "x" +
                                                std::to_string(col_width));
  }
  const int onr = nr / row_width;
  const int onc = nc / col_width;
  out.reshape(in.range_a(), in.range_b(), {onr, onc}, in.stage() + 1);
  const std::size_t p = in.pixels();
  const std::size_t op = out.pixels();
  const double scale = 1.0 / (static_cast<double>(row_width) * row_width * col_width * col_width);
  std::vector<double> acc(static_cast<std::size_t>(onc));
  for (std::size_t i = 0; i < in.batch_a(); ++i) {
    for (std::size_t l = 0; l < in.batch_b(); ++l) {
      const float* src = in.pair(i, l).data();
      float* dst = out.pair(i, l).data();
      for (int oj = 0; oj < onr; ++oj) {
        for (int ok = 0; ok < onc; ++ok) {
          for (int om = 0; om < onr; ++om) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int a = 0; a < row_width; ++a) {
              for (int b = 0; b < col_width; ++b) {
                const std::size_t u = static_cast<std::size_t>(oj * row_width + a) * nc + (ok * col_width + b);
                for (int c = 0; c < row_width; ++c) {
                  const float* row = src + u * p + static_cast<std::size_t>(om * row_width + c) * nc;
                  for (int on = 0; on < onc; ++on) {
                    double s = 0.0;
                    for (int d = 0; d < col_width; ++d) s += row[on * col_width + d];
                    acc[on] += s;
                  }
                }
              }
            }
            float* d = dst + (static_cast<std::size_t>(oj) * onc + ok) * op + static_cast<std::size_t>(om) * onc;
            for (int on = 0; on < onc; ++on) d[on] = static_cast<float>(acc[on] * scale);
          }
        }
      }
    }
  }
}

KernelBlock pool(const KernelBlock& in, int w) {
  KernelBlock out;
  pool_into(in, w, w, out);
  return out;
}

KernelBlock global_pool(const KernelBlock& in) {
  KernelBlock out;
  pool_into(in, in.dims().rows, in.dims().cols, out);
  return out;
}

void relu_embed_into(const KernelBlock& in, const DiagCache& diag_a, const DiagCache& diag_b, KernelBlock& out) {
  embed_into(in, diag_a, diag_b, out, relu_from_product);
}

KernelBlock relu_embed(const KernelBlock& in, const DiagCache& diag_a, const DiagCache& diag_b) {
  KernelBlock out;
  relu_embed_into(in, diag_a, diag_b, out);
  return out;
}

void gauss_embed_into(const KernelBlock& in, const DiagCache& diag_a, const DiagCache& diag_b, KernelBlock& out) {
  embed_into(in, diag_a, diag_b, out, gauss_from_product);
}

KernelBlock gauss_embed(const KernelBlock& in, const DiagCache& diag_a, const DiagCache& diag_b) {
  KernelBlock out;
  gauss_embed_into(in, diag_a, diag_b, out);
  return out;
}

DiagCache update_diag(const KernelBlock& diagonal) {
  if (!diagonal.is_diagonal()) throw Error(ErrorKind::InvalidArgument, "update_diag needs a diagonal block");
  DiagCache cache(diagonal.range_a(), diagonal.dims());
  const std::size_t p = diagonal.pixels();
  for (std::size_t i = 0; i < diagonal.batch_a(); ++i) {
    auto slab = diagonal.pair(i, i);
    double scale = 0.0;
    for (std::size_t x = 0; x < p; ++x) scale = std::max(scale, std::abs(static_cast<double>(slab[x * p + x])));
    if (scale == 0.0) scale = 1.0;
    auto norms = cache.norms(diagonal.range_a().begin + i);
    for (std::size_t x = 0; x < p; ++x) {
      const double v = slab[x * p + x];
      if (v < -1e-4 * scale) {
        throw Error(ErrorKind::NegativeDiagonal, "diagonal entry " + std::to_string(v) + " for image " +
                                                     std::to_string(diagonal.range_a().begin + i));
      }
      norms[x] = std::sqrt(std::max(0.0, v));
    }
  }
  return cache;
}

const LayerOperators& LayerOperators::exact() {
  static const LayerOperators ops{
      [](const KernelBlock& in, int w, KernelBlock& out) { conv_into(in, w, out); },
      [](const KernelBlock& in, int wr, int wc, KernelBlock& out) { pool_into(in, wr, wc, out); },
      [](const KernelBlock& in, const DiagCache& a, const DiagCache& b, KernelBlock& out) {
        relu_embed_into(in, a, b, out);
      },
      [](const KernelBlock& in, const DiagCache& a, const DiagCache& b, KernelBlock& out) {
        gauss_embed_into(in, a, b, out);
      },
  };
  return ops;
}

void apply_layer(const LayerOperators& ops, const LayerDesc& layer, const KernelBlock& in, const DiagCache* diag_a,
                 const DiagCache* diag_b, KernelBlock& out) {
  switch (layer.kind()) {
    case LayerKind::Conv:
      ops.conv(in, layer.width(), out);
      break;
    case LayerKind::Pool:
      ops.pool(in, layer.width(), layer.width(), out);
      break;
    case LayerKind::GlobalPool:
      ops.pool(in, in.dims().rows, in.dims().cols, out);
      break;
    case LayerKind::ReluEmbed:
    case LayerKind::GaussEmbed:
      if (diag_a == nullptr || diag_b == nullptr) {
        throw Error(ErrorKind::InvalidArgument, "embedding layer applied without diag caches");
      }
      if (layer.kind() == LayerKind::ReluEmbed) {
        ops.relu(in, *diag_a, *diag_b, out);
      } else {
        ops.gauss(in, *diag_a, *diag_b, out);
      }
      break;
    case LayerKind::InputKernel:
      throw Error(ErrorKind::InvalidArgument, "input kernel is implicit and cannot appear as a layer");
  }
}

}  // namespace ckernel
