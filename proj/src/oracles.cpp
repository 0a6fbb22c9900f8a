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

#include "ckernel/oracles.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ckernel/binary_io.hpp"
#include "ckernel/errors.hpp"
#include "ckernel/parallel.hpp"
#include "ckernel/quadrature.hpp"

namespace ckernel {

McEstimate McTensor::at(std::size_t i, int j, int k, std::size_t l, int m, int n) const {
  const auto r = static_cast<Eigen::Index>(index(i, j, k));
  const auto c = static_cast<Eigen::Index>(index(l, m, n));
  return {mean(r, c), std_error(r, c), trials, width, seed};
}

McTensor mc_relu_conv(const ImageDataset& images, int w, int trials, int width, std::uint64_t seed,
                      unsigned threads) {
  if (trials < 2) throw Error(ErrorKind::InvalidArgument, "need at least two trials");
  if (width < 1 || w < 0) throw Error(ErrorKind::InvalidArgument, "bad width");
  const int rows = images.dims.rows, cols = images.dims.cols, ch = images.channels;
  const int side = 2 * w + 1;
  const Eigen::Index patch_len = static_cast<Eigen::Index>(side) * side * ch;
  const auto positions = static_cast<Eigen::Index>(images.size() * static_cast<std::size_t>(rows * cols));

  // Patch matrix: one zero-padded flattened patch per (image, pixel).
  Eigen::MatrixXd patches = Eigen::MatrixXd::Zero(positions, patch_len);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto img = images.image(i);
    for (int j = 0; j < rows; ++j) {
      for (int k = 0; k < cols; ++k) {
        const auto row = static_cast<Eigen::Index>((i * rows + j) * cols + k);
        Eigen::Index col = 0;
        for (int dx = -w; dx <= w; ++dx) {
          for (int dy = -w; dy <= w; ++dy) {
            for (int c = 0; c < ch; ++c, ++col) {
              const int jj = j + dx, kk = k + dy;
              if (jj < 0 || jj >= rows || kk < 0 || kk >= cols) continue;
              patches(row, col) = img[(static_cast<std::size_t>(jj) * cols + kk) * ch + c];
            }
          }
        }
      }
    }
  }

  constexpr int kChunk = 64;
  const int chunks = (trials + kChunk - 1) / kChunk;
  std::vector<Eigen::MatrixXd> sums(static_cast<std::size_t>(chunks)), squares(static_cast<std::size_t>(chunks));
  const double scale = std::sqrt(2.0 / width);
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t chunk) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(positions, positions);
    Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(positions, positions);
    Eigen::MatrixXd weights(patch_len, width);
    const int first = static_cast<int>(chunk) * kChunk;
    const int last = std::min(trials, first + kChunk);
    for (int t = first; t < last; ++t) {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index c = 0; c < width; ++c) {
        for (Eigen::Index d = 0; d < patch_len; ++d) weights(d, c) = normal(rng) * scale;
      }
      const Eigen::MatrixXd psi = (patches * weights).cwiseMax(0.0);
      const Eigen::MatrixXd x = psi * psi.transpose();
      s += x;
      sq += x.cwiseProduct(x);
    }
    sums[chunk] = std::move(s);
    squares[chunk] = std::move(sq);
  });

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(positions, positions), sq = s;
  for (int c = 0; c < chunks; ++c) {
    s += sums[static_cast<std::size_t>(c)];
    sq += squares[static_cast<std::size_t>(c)];
  }
  McTensor out;
  out.images = images.size();
  out.dims = images.dims;
  out.trials = trials;
  out.width = width;
  out.seed = seed;
  const double t = trials;
  out.mean = s / t;
  const Eigen::MatrixXd var = ((sq - t * out.mean.cwiseProduct(out.mean)) / (t - 1.0)).cwiseMax(0.0);
  out.std_error = (var / t).cwiseSqrt();
  return out;
}

double quad_dual_relu(double rho) {
  return dual_activation_polar([](double x) { return x > 0 ? std::numbers::sqrt2 * x : 0.0; }, rho);
}

double quad_dual_gauss(double rho) {
  return dual_activation_polar([](double x) { return std::exp(x - 1.0); }, rho);
}

double closed_dual_relu(double rho) {
  return (std::sqrt(std::max(0.0, 1.0 - rho * rho)) + rho * (std::numbers::pi - std::acos(rho))) / std::numbers::pi;
}

double closed_dual_gauss(double rho) { return std::exp(rho - 1.0); }

Tensor6::Tensor6(std::size_t na_, std::size_t nb_, int rows_, int cols_)
    : na(na_), nb(nb_), rows(rows_), cols(cols_),
      v(na_ * nb_ * static_cast<std::size_t>(rows_ * cols_) * static_cast<std::size_t>(rows_ * cols_), 0.0) {}

double& Tensor6::operator()(std::size_t i, int j, int k, std::size_t l, int m, int n) {
  return v[((((i * rows + j) * cols + k) * nb + l) * rows + m) * cols + n];
}

double Tensor6::operator()(std::size_t i, int j, int k, std::size_t l, int m, int n) const {
  return v[((((i * rows + j) * cols + k) * nb + l) * rows + m) * cols + n];
}

Tensor6 to_tensor(const KernelBlock& block) {
  Tensor6 t(block.batch_a(), block.batch_b(), block.dims().rows, block.dims().cols);
  for (std::size_t i = 0; i < t.na; ++i)
    for (int j = 0; j < t.rows; ++j)
      for (int k = 0; k < t.cols; ++k)
        for (std::size_t l = 0; l < t.nb; ++l)
          for (int m = 0; m < t.rows; ++m)
            for (int n = 0; n < t.cols; ++n) t(i, j, k, l, m, n) = block.at(i, j, k, l, m, n);
  return t;
}

Tensor6 naive_input(const ImageDataset& a, const ImageDataset& b) {
  if (a.dims != b.dims || a.channels != b.channels) throw Error(ErrorKind::ShapeMismatch, "image shapes differ");
  const int rows = a.dims.rows, cols = a.dims.cols, ch = a.channels;
  Tensor6 t(a.size(), b.size(), rows, cols);
  auto px = [&](const ImageDataset& d, std::size_t i, int j, int k, int c) {
    return static_cast<double>(d.pixels[((i * rows + j) * cols + k) * ch + c]);
  };
  for (std::size_t i = 0; i < t.na; ++i)
    for (int j = 0; j < rows; ++j)
      for (int k = 0; k < cols; ++k)
        for (std::size_t l = 0; l < t.nb; ++l)
          for (int m = 0; m < rows; ++m)
            for (int n = 0; n < cols; ++n) {
              double s = 0.0;
              for (int c = 0; c < ch; ++c) s += px(a, i, j, k, c) * px(b, l, m, n, c);
              t(i, j, k, l, m, n) = s;
            }
  return t;
}

Tensor6 naive_conv(const Tensor6& in, int w) {
  Tensor6 t(in.na, in.nb, in.rows, in.cols);
  auto inside = [&](int r, int c) { return r >= 0 && r < in.rows && c >= 0 && c < in.cols; };
  for (std::size_t i = 0; i < in.na; ++i)
    for (int j = 0; j < in.rows; ++j)
      for (int k = 0; k < in.cols; ++k)
        for (std::size_t l = 0; l < in.nb; ++l)
          for (int m = 0; m < in.rows; ++m)
            for (int n = 0; n < in.cols; ++n) {
              double s = 0.0;
              for (int dx = -w; dx <= w; ++dx)
                for (int dy = -w; dy <= w; ++dy) {
                  if (!inside(j + dx, k + dy) || !inside(m + dx, n + dy)) continue;
                  s += in(i, j + dx, k + dy, l, m + dx, n + dy);
                }
              t(i, j, k, l, m, n) = s;
            }
  return t;
}

Tensor6 naive_pool(const Tensor6& in, int wr, int wc) {
  if (in.rows % wr != 0 || in.cols % wc != 0) throw Error(ErrorKind::PoolIndivisible, "pool width does not divide");
  Tensor6 t(in.na, in.nb, in.rows / wr, in.cols / wc);
  const double scale = 1.0 / (static_cast<double>(wr) * wr * wc * wc);
  for (std::size_t i = 0; i < t.na; ++i)
    for (int j = 0; j < t.rows; ++j)
      for (int k = 0; k < t.cols; ++k)
        for (std::size_t l = 0; l < t.nb; ++l)
          for (int m = 0; m < t.rows; ++m)
            for (int n = 0; n < t.cols; ++n) {
              double s = 0.0;
              for (int a = 0; a < wr; ++a)
                for (int b = 0; b < wc; ++b)
                  for (int c = 0; c < wr; ++c)
                    for (int d = 0; d < wc; ++d) s += in(i, j * wr + a, k * wc + b, l, m * wr + c, n * wc + d);
              t(i, j, k, l, m, n) = s * scale;
            }
  return t;
}

Tensor6 naive_global_pool(const Tensor6& in) { return naive_pool(in, in.rows, in.cols); }

namespace {

template <class F>
Tensor6 naive_embed(const Tensor6& in, const std::vector<double>& na, const std::vector<double>& nb, F f) {
  Tensor6 t(in.na, in.nb, in.rows, in.cols);
  const std::size_t p = static_cast<std::size_t>(in.rows) * in.cols;
  for (std::size_t i = 0; i < in.na; ++i)
    for (int j = 0; j < in.rows; ++j)
      for (int k = 0; k < in.cols; ++k)
        for (std::size_t l = 0; l < in.nb; ++l)
          for (int m = 0; m < in.rows; ++m)
            for (int n = 0; n < in.cols; ++n) {
              const double a = na[i * p + static_cast<std::size_t>(j * in.cols + k)];
              const double b = nb[l * p + static_cast<std::size_t>(m * in.cols + n)];
              const double ab = a * b;
              if (ab == 0.0) {
                t(i, j, k, l, m, n) = 0.0;
                continue;
              }
              const double rho = std::clamp(in(i, j, k, l, m, n) / ab, -1.0, 1.0);
              t(i, j, k, l, m, n) = ab * f(rho);
            }
  return t;
}

}  // namespace

Tensor6 naive_relu(const Tensor6& in, const std::vector<double>& norms_a, const std::vector<double>& norms_b) {
  return naive_embed(in, norms_a, norms_b, [](double rho) {
    const double theta = std::acos(rho);
    return (std::sin(theta) + (std::numbers::pi - theta) * std::cos(theta)) / std::numbers::pi;
  });
}

Tensor6 naive_gauss(const Tensor6& in, const std::vector<double>& norms_a, const std::vector<double>& norms_b) {
  return naive_embed(in, norms_a, norms_b, [](double rho) { return std::exp(rho - 1.0); });
}

std::vector<double> naive_norms(const Tensor6& square) {
  if (square.na != square.nb) throw Error(ErrorKind::ShapeMismatch, "norms need a square tensor");
  std::vector<double> out;
  for (std::size_t i = 0; i < square.na; ++i)
    for (int j = 0; j < square.rows; ++j)
      for (int k = 0; k < square.cols; ++k) out.push_back(std::sqrt(std::max(0.0, square(i, j, k, i, j, k))));
  return out;
}

GramMatrix naive_compose(const ImageDataset& a, const ImageDataset& b, const ArchSpec& arch) {
  if (a.dims != b.dims || a.channels != b.channels) throw Error(ErrorKind::ShapeMismatch, "image shapes differ");
  ImageDataset both = a;
  both.pixels.insert(both.pixels.end(), b.pixels.begin(), b.pixels.end());
  both.labels.insert(both.labels.end(), b.labels.begin(), b.labels.end());
  Tensor6 t = naive_input(both, both);
  for (const auto& layer : arch.layers) {
    switch (layer.kind()) {
      case LayerKind::Conv: t = naive_conv(t, layer.width()); break;
      case LayerKind::Pool: t = naive_pool(t, layer.width(), layer.width()); break;
      case LayerKind::GlobalPool: t = naive_global_pool(t); break;
      case LayerKind::ReluEmbed: {
        const auto norms = naive_norms(t);
        t = naive_relu(t, norms, norms);
        break;
      }
      case LayerKind::GaussEmbed: {
        const auto norms = naive_norms(t);
        t = naive_gauss(t, norms, norms);
        break;
      }
      case LayerKind::InputKernel: break;
    }
  }
  if (t.rows != 1 || t.cols != 1) throw Error(ErrorKind::NotScalar, "architecture does not reduce to 1x1");
  GramMatrix g;
  g.values.resize(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t l = 0; l < b.size(); ++l)
      g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = t(i, 0, 0, a.size() + l, 0, 0);
  for (std::size_t i = 0; i < a.size(); ++i) g.row_ids.push_back(static_cast<std::uint32_t>(i));
  for (std::size_t l = 0; l < b.size(); ++l) g.col_ids.push_back(static_cast<std::uint32_t>(l));
  return g;
}

Eigen::MatrixXd brute_loo(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || y.rows() != n) throw Error(ErrorKind::ShapeMismatch, "K and Y sizes differ");
  Eigen::MatrixXd out(n, y.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < n; ++r)
      if (r != i) keep.push_back(r);
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd sub(m, m), ysub(m, y.cols());
    Eigen::RowVectorXd cross(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = k(keep[a], keep[b]);
      sub(a, a) += lambda;
      ysub.row(a) = y.row(keep[a]);
      cross(a) = k(i, keep[a]);
    }
    if (m == 0) {
      out.row(i).setZero();
      continue;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (!lu.isInvertible()) {
      throw Error(ErrorKind::FactorizationFailed, "leave-one-out system " + std::to_string(i) + " is singular");
    }
    const Eigen::MatrixXd inv = lu.inverse();
    out.row(i) = cross * (inv * ysub);
  }
  return out;
}

}  // namespace ckernel
