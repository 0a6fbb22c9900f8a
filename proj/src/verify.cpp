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

#include "ckernel/verify.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>

#include "ckernel/engine.hpp"
#include "ckernel/errors.hpp"
#include "ckernel/oracles.hpp"
#include "ckernel/regression.hpp"

namespace ckernel {

ArchSpec random_arch(std::mt19937_64& rng, Spatial input, int max_layers) {
  ArchSpec arch;
  arch.name = "random";
  Spatial dims = input;
  std::uniform_int_distribution<int> count(0, max_layers);
  std::uniform_int_distribution<int> pick(0, 4);
  const int layers = count(rng);
  for (int i = 0; i < layers; ++i) {
    switch (pick(rng)) {
      case 0: arch.layers.push_back(LayerDesc::conv(3)); break;
      case 1: arch.layers.push_back(LayerDesc::conv(std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? 5 : 3)); break;
      case 2: arch.layers.push_back(LayerDesc::relu()); break;
      case 3: arch.layers.push_back(LayerDesc::gauss()); break;
      default: {
        std::vector<int> widths;
        for (int w = 2; w <= 4; ++w)
          if (dims.rows % w == 0 && dims.cols % w == 0) widths.push_back(w);
        if (widths.empty()) break;
        const int w = widths[std::uniform_int_distribution<std::size_t>(0, widths.size() - 1)(rng)];
        arch.layers.push_back(LayerDesc::pool(w));
        dims = {dims.rows / w, dims.cols / w};
      }
    }
  }
  if (dims != Spatial{1, 1}) arch.layers.push_back(LayerDesc::global_pool());
  return arch;
}

ImageDataset random_images(std::size_t n, Spatial dims, int channels, std::uint64_t seed, int classes) {
  ImageDataset d;
  d.dims = dims;
  d.channels = channels;
  d.class_count = classes;
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  d.pixels.resize(n * static_cast<std::size_t>(dims.rows * dims.cols * channels));
  for (auto& p : d.pixels) p = normal(rng);
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(static_cast<int>(i % static_cast<std::size_t>(classes)));
    d.ids.push_back(static_cast<std::uint32_t>(i));
  }
  d.provenance = "random(seed=" + std::to_string(seed) + ")";
  return d;
}

namespace {

void check_block(const KernelBlock& k, PropertyViolations& v) {
  const std::size_t n = k.batch_a(), p = k.pixels();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t x = 0; x < p; ++x) scale = std::max(scale, std::abs(static_cast<double>(k.pair(i, i)[x * p + x])));
  for (std::size_t i = 0; i < n; ++i) {
    const auto dii = k.pair(i, i);
    for (std::size_t x = 0; x < p; ++x)
      if (dii[x * p + x] < -1e-6 * scale) ++v.negative_diagonal;
    for (std::size_t l = 0; l < n; ++l) {
      const auto kil = k.pair(i, l), kli = k.pair(l, i), dll = k.pair(l, l);
      for (std::size_t x = 0; x < p; ++x) {
        for (std::size_t y = 0; y < p; ++y) {
          const double a = kil[x * p + y], b = kli[y * p + x];
          if (std::abs(a - b) > 1e-5 * std::max(std::abs(a), std::abs(b)) + 1e-7 * scale) ++v.symmetry;
          const double bound = std::sqrt(std::max(0.0, static_cast<double>(dii[x * p + x])) *
                                         std::max(0.0, static_cast<double>(dll[y * p + y])));
          if (std::abs(a) > bound + 1e-5 * scale) ++v.cauchy_schwarz;
        }
      }
    }
  }
}

}  // namespace

PropertyViolations check_properties(const ImageDataset& data, const ArchSpec& arch, const LayerOperators& ops) {
  PropertyViolations v;
  const BatchRange all{0, data.size()};
  KernelBlock cur, next;
  input_kernel_into(data.view(all), data.view(all), cur);
  check_block(cur, v);
  for (const auto& layer : arch.layers) {
    if (layer.is_embedding()) {
      const DiagCache diag = update_diag(cur);
      apply_layer(ops, layer, cur, &diag, &diag, next);
      const std::size_t p = cur.pixels();
      for (std::size_t i = 0; i < cur.batch_a(); ++i) {
        for (std::size_t x = 0; x < p; ++x) {
          const double before = std::max(0.0, static_cast<double>(cur.pair(i, i)[x * p + x]));
          const double after = next.pair(i, i)[x * p + x];
          if (std::abs(after - before) > 1e-5 * before + 1e-30) ++v.diagonal_preservation;
        }
      }
    } else {
      apply_layer(ops, layer, cur, nullptr, nullptr, next);
    }
    std::swap(cur, next);
    check_block(cur, v);
  }
  if (cur.dims() == Spatial{1, 1}) {
    const auto n = static_cast<Eigen::Index>(cur.batch_a());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index l = 0; l < n; ++l)
        g(i, l) = cur.pair(static_cast<std::size_t>(i), static_cast<std::size_t>(l))[0];
    const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (min_eig < -1e-5 * sym.trace() / static_cast<double>(n)) ++v.psd;
  }
  return v;
}

double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::ShapeMismatch, "matrix shapes differ");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(std::abs(b(i, j)), floor));
  return worst;
}

LayerOperators faulty_operators(const std::string& fault) {
  LayerOperators ops = LayerOperators::exact();
  if (fault == "conv-sign") {
    ops.conv = [](const KernelBlock& in, int w, KernelBlock& out) {
      conv_into(in, w, out);
      for (auto& x : out.values()) x = -x;
    };
  } else if (!fault.empty()) {
    throw Error(ErrorKind::InvalidArgument, "unknown fault '" + fault + "'");
  }
  return ops;
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

template <class F>
GateResult gate(const std::string& name, F&& body) {
  GateResult r{name, false, {}};
  const auto start = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.detail += fmt(" (%.2f s)", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return r;
}

double tensor_error(const Tensor6& got, const Tensor6& ref) {
  double worst = 0.0, scale = 0.0;
  for (double x : ref.v) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < ref.v.size(); ++i) worst = std::max(worst, std::abs(got.v[i] - ref.v[i]));
  return scale > 0 ? worst / scale : worst;
}

std::vector<double> diag_norms(const KernelBlock& square) {
  std::vector<double> out;
  const std::size_t p = square.pixels();
  for (std::size_t i = 0; i < square.batch_a(); ++i)
    for (std::size_t x = 0; x < p; ++x) out.push_back(std::sqrt(std::max(0.0, static_cast<double>(square.pair(i, i)[x * p + x]))));
  return out;
}

// Entrywise error of a Gram block normalised by the Cauchy-Schwarz scale
// sqrt(K_aa K_bb), which is the natural size of each entry.
double kernel_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& ref, const Eigen::VectorXd& diag_a,
                    const Eigen::VectorXd& diag_b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ref.rows(); ++i)
    for (Eigen::Index j = 0; j < ref.cols(); ++j) {
      const double s = std::sqrt(std::max(diag_a(i), 0.0) * std::max(diag_b(j), 0.0));
      worst = std::max(worst, std::abs(got(i, j) - ref(i, j)) / std::max(s, 1e-300));
    }
  return worst;
}

}  // namespace

std::vector<GateResult> run_verify(VerifyLevel level, const LayerOperators& ops, std::uint64_t seed,
                                   unsigned threads) {
  const bool full = level == VerifyLevel::Full;
  std::vector<GateResult> results;

  results.push_back(gate("dual-quadrature", [&](GateResult& r) {
    double relu_err = 0.0, gauss_err = 0.0, op_err = 0.0;
    for (int i = -10; i <= 10; ++i) {
      const double rho = i / 10.0;
      const double q = quad_dual_relu(rho);
      relu_err = std::max(relu_err, std::abs(q - closed_dual_relu(rho)));
      gauss_err = std::max(gauss_err, std::abs(quad_dual_gauss(rho) - closed_dual_gauss(rho)));
      op_err = std::max(op_err, std::abs(q - relu_kernel_value(rho, 1.0, 1.0)));
      op_err = std::max(op_err, std::abs(quad_dual_gauss(rho) - gauss_kernel_value(rho, 1.0, 1.0)));
    }
    r.passed = relu_err <= 1e-4 && gauss_err <= 1e-4 && op_err <= 1e-4;
    r.detail = "relu " + fmt("%.2e", relu_err) + ", gauss " + fmt("%.2e", gauss_err) + ", operators " +
               fmt("%.2e", op_err);
  }));

  results.push_back(gate("operators-vs-naive", [&](GateResult& r) {
    double worst = 0.0;
    const int cases = full ? 10 : 3;
    for (int c = 0; c < cases; ++c) {
      const auto data = random_images(3, {4, 4}, 2, derive_seed(seed, 100 + c));
      KernelBlock in, out;
      const BatchRange all{0, data.size()};
      input_kernel_into(data.view(all), data.view(all), in);
      const Tensor6 ref_in = naive_input(data, data);
      worst = std::max(worst, tensor_error(to_tensor(in), ref_in));
      for (int w : {1, 2}) {
        ops.conv(in, w, out);
        worst = std::max(worst, tensor_error(to_tensor(out), naive_conv(ref_in, w)));
      }
      for (int w : {2, 4}) {
        ops.pool(in, w, w, out);
        worst = std::max(worst, tensor_error(to_tensor(out), naive_pool(ref_in, w, w)));
      }
      const DiagCache diag = update_diag(in);
      const auto norms = diag_norms(in);
      ops.relu(in, diag, diag, out);
      worst = std::max(worst, tensor_error(to_tensor(out), naive_relu(ref_in, norms, norms)));
      ops.gauss(in, diag, diag, out);
      worst = std::max(worst, tensor_error(to_tensor(out), naive_gauss(ref_in, norms, norms)));
    }
    r.passed = worst <= 1e-5;
    r.detail = "max error " + fmt("%.2e", worst) + " of tensor scale over " + std::to_string(cases) + " cases";
  }));

  results.push_back(gate("engine-vs-naive", [&](GateResult& r) {
    std::mt19937_64 rng(derive_seed(seed, 200));
    const int cases = full ? 25 : 5;
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
      const int side = std::uniform_int_distribution<int>(1, full ? 8 : 6)(rng);
      const Spatial dims{side, std::uniform_int_distribution<int>(1, full ? 8 : 6)(rng)};
      const auto arch = random_arch(rng, dims);
      const auto a = random_images(std::uniform_int_distribution<std::size_t>(1, full ? 6 : 4)(rng), dims, 3,
                                   derive_seed(seed, 300 + c));
      const auto b = random_images(std::uniform_int_distribution<std::size_t>(1, full ? 6 : 4)(rng), dims, 3,
                                   derive_seed(seed, 400 + c));
      ComposeOptions options;
      options.operators = &ops;
      options.threads = threads;
      options.tile = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
      const auto naa = naive_compose(a, a, arch), nbb = naive_compose(b, b, arch), nab = naive_compose(a, b, arch);
      const Eigen::VectorXd da = naa.values.diagonal(), db = nbb.values.diagonal();
      worst = std::max(worst, kernel_error(compose_kernel(a, a, arch, options).values, naa.values, da, da));
      worst = std::max(worst, kernel_error(compose_kernel(a, b, arch, options).values, nab.values, da, db));
    }
    r.passed = worst <= 1e-5;
    r.detail = "max error " + fmt("%.2e", worst) + " (entrywise, relative to sqrt(K_aa K_bb)) over " +
               std::to_string(cases) + " random architectures";
  }));

  results.push_back(gate("random-features", [&](GateResult& r) {
    const std::size_t n = full ? 4 : 2;
    const Spatial dims = full ? Spatial{6, 6} : Spatial{4, 4};
    const int channels = full ? 3 : 2, width = full ? 256 : 64, trials = full ? 4096 : 512;
    const auto data = random_images(n, dims, channels, derive_seed(seed, 500));
    const auto mc = mc_relu_conv(data, 1, trials, width, derive_seed(seed, 501), threads);
    KernelBlock k, c, out;
    const BatchRange all{0, n};
    input_kernel_into(data.view(all), data.view(all), k);
    ops.conv(k, 1, c);
    const DiagCache diag = update_diag(c);
    ops.relu(c, diag, diag, out);
    std::size_t within = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (int j = 0; j < dims.rows; ++j)
        for (int kk = 0; kk < dims.cols; ++kk)
          for (std::size_t l = 0; l < n; ++l)
            for (int m = 0; m < dims.rows; ++m)
              for (int nn = 0; nn < dims.cols; ++nn) {
                const auto e = mc.at(i, j, kk, l, m, nn);
                within += std::abs(e.mean - out.at(i, j, kk, l, m, nn)) <= 4 * e.std_error ? 1 : 0;
                ++total;
              }
    const double frac = static_cast<double>(within) / static_cast<double>(total);
    r.passed = frac >= 0.95;
    r.detail = fmt("%.4f", frac) + " of " + std::to_string(total) + " entries within 4 SE (" +
               std::to_string(trials) + " trials, D4=" + std::to_string(width) + ")";
  }));

  results.push_back(gate("loo-closed-form", [&](GateResult& r) {
    std::mt19937_64 rng(derive_seed(seed, 600));
    std::normal_distribution<double> normal;
    double worst = 0.0;
    const int systems = full ? 10 : 2;
    for (int s = 0; s < systems; ++s) {
      for (int n : {10, 30}) {
        Eigen::MatrixXd x(n, n + 5);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
        const Eigen::MatrixXd k = x * x.transpose() / static_cast<double>(x.cols());
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) labels.push_back(std::uniform_int_distribution<int>(0, 2)(rng));
        const Eigen::MatrixXd y = one_hot(labels, 3);
        for (double lambda : {0.01, 1.0}) {
          worst = std::max(worst, (loo_predict(k, y, lambda) - brute_loo(k, y, lambda)).cwiseAbs().maxCoeff());
        }
      }
    }
    r.passed = worst <= 1e-8;
    r.detail = "max abs difference " + fmt("%.2e", worst);
  }));

  return results;
}

}  // namespace ckernel
