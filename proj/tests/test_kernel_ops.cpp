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

#include <cmath>
#include <numbers>
#include <random>

#include "ckernel/errors.hpp"
#include "ckernel/kernel_ops.hpp"
#include "ckernel/oracles.hpp"
#include "ckernel/verify.hpp"

using namespace ckernel;

namespace {

ImageDataset images_from(std::vector<float> pixels, Spatial dims, int channels) {
  ImageDataset d;
  d.dims = dims;
  d.channels = channels;
  d.class_count = 1;
  d.pixels = std::move(pixels);
  d.labels.assign(d.pixels.size() / d.image_size(), 0);
  return d;
}

KernelBlock constant_block(std::size_t n, Spatial dims, float value) {
  KernelBlock b({0, n}, {0, n}, dims);
  for (auto& x : b.values()) x = value;
  return b;
}

double max_diff(const Tensor6& a, const Tensor6& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

KernelBlock random_block(std::uint64_t seed, std::size_t n = 3, Spatial dims = {4, 4}) {
  const auto data = random_images(n, dims, 3, seed);
  return input_kernel(data.view(), data.view());
}

}  // namespace

TEST_CASE("input kernel is the channel dot product") {
  const auto d = images_from({1, 0, 0, 0, 1, 0}, {1, 1}, 3);
  const auto k = input_kernel(d.view(), d.view());
  CHECK(k.at(0, 0, 0, 1, 0, 0) == 0.0f);
  CHECK(k.at(0, 0, 0, 0, 0, 0) == 1.0f);
  const auto e = images_from({1, 2, 3}, {1, 1}, 3);
  CHECK(input_kernel(e.view(), e.view()).at(0, 0, 0, 0, 0, 0) == 14.0f);
}

TEST_CASE("input kernel matches the naive triple loop") {
  const auto a = random_images(2, {2, 2}, 3, 11), b = random_images(3, {2, 2}, 3, 12);
  CHECK(max_diff(to_tensor(input_kernel(a.view(), b.view())), naive_input(a, b)) < 1e-5);
  const auto c = random_images(1, {2, 3}, 3, 13);
  CHECK_THROWS_AS(input_kernel(a.view(), c.view()), Error);
}

TEST_CASE("conv") {
  SUBCASE("1x1 spatial is unchanged for any width") {
    const auto k = random_block(1, 2, {1, 1});
    for (int w : {1, 2, 3}) CHECK(max_diff(to_tensor(conv(k, w)), to_tensor(k)) == 0.0);
  }
  SUBCASE("2x2 of ones, w=1: corner sums the four in-bounds offsets") {
    const auto out = conv(constant_block(1, {2, 2}, 1.0f), 1);
    CHECK(out.at(0, 0, 0, 0, 0, 0) == 4.0f);
    CHECK(out.at(0, 0, 0, 0, 1, 1) == 1.0f);  // only offset (0,0) keeps both in bounds
  }
  SUBCASE("matches the naive reference") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto k = random_block(20 + s, 2, {5, 3});
      for (int w : {1, 2}) CHECK(max_diff(to_tensor(conv(k, w)), naive_conv(to_tensor(k), w)) < 1e-4);
    }
  }
}

TEST_CASE("pool") {
  SUBCASE("constant in, constant out") {
    const auto out = pool(constant_block(2, {4, 4}, 3.0f), 2);
    CHECK(out.dims() == Spatial{2, 2});
    for (float x : out.values()) CHECK(x == doctest::Approx(3.0));
  }
  SUBCASE("2x2 to 1x1 is the mean of all 16 entries") {
    KernelBlock k({0, 1}, {0, 1}, {2, 2});
    double sum = 0;
    for (std::size_t i = 0; i < 16; ++i) {
      k.values()[i] = static_cast<float>(i * i + 1);
      sum += static_cast<double>(i * i + 1);
    }
    CHECK(pool(k, 2).at(0, 0, 0, 0, 0, 0) == doctest::Approx(sum / 16));
  }
  SUBCASE("indivisible dims are rejected") {
    try {
      pool(random_block(3, 1, {3, 3}), 2);
      FAIL("expected PoolIndivisible");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::PoolIndivisible);
    }
  }
  SUBCASE("matches the naive reference") {
    const auto k = random_block(4, 2, {4, 6});
    CHECK(max_diff(to_tensor(pool(k, 2)), naive_pool(to_tensor(k), 2, 2)) < 1e-5);
  }
}

TEST_CASE("global pool equals row then column pooling") {
  const auto k = random_block(5, 2, {4, 6});
  const auto g = global_pool(k);
  CHECK(g.dims() == Spatial{1, 1});
  KernelBlock rows, both;
  pool_into(k, 4, 1, rows);
  pool_into(rows, 1, 6, both);
  CHECK(max_diff(to_tensor(g), to_tensor(both)) < 1e-5);
  CHECK(max_diff(to_tensor(global_pool(constant_block(1, {3, 5}, 2.5f))), to_tensor(constant_block(1, {1, 1}, 2.5f))) < 1e-6);
  const auto one = random_block(6, 2, {1, 1});
  CHECK(max_diff(to_tensor(global_pool(one)), to_tensor(one)) == 0.0);
}

TEST_CASE("relu embedding closed form") {
  CHECK(relu_kernel_value(1.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(relu_kernel_value(-1.0, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(relu_kernel_value(0.0, 1.0, 1.0) == doctest::Approx(1.0 / std::numbers::pi));
  CHECK(relu_kernel_value(0.5, 1.0, 1.0) == doctest::Approx(0.608998).epsilon(1e-6));
  CHECK(relu_kernel_value(6.0, 2.0, 3.0) == doctest::Approx(6.0));
  CHECK(relu_kernel_value(0.0, 0.0, 3.0) == 0.0);
  CHECK(relu_kernel_value(1.0 + 1e-7, 1.0, 1.0) == doctest::Approx(1.0));  // clamped
}

TEST_CASE("gauss embedding closed form") {
  CHECK(gauss_kernel_value(1.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(gauss_kernel_value(0.0, 1.0, 1.0) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(gauss_kernel_value(-1.0, 1.0, 1.0) == doctest::Approx(0.135335).epsilon(1e-6));
  CHECK(gauss_kernel_value(0.0, 0.0, 1.0) == 0.0);
}

TEST_CASE("fast arccos stays within 3e-8") {
  double worst = 0;
  for (int i = -20000; i <= 20000; ++i) {
    const double x = i / 20000.0;
    worst = std::max(worst, std::abs(fast_acos(x) - std::acos(x)));
  }
  CHECK(worst < 3e-8);
}

TEST_CASE("embeddings match naive references and preserve the diagonal") {
  const auto k = random_block(7, 3, {3, 3});
  const auto diag = update_diag(k);
  const auto norms = naive_norms(to_tensor(k));
  const auto r = relu_embed(k, diag, diag), g = gauss_embed(k, diag, diag);
  const auto ref_r = naive_relu(to_tensor(k), norms, norms), ref_g = naive_gauss(to_tensor(k), norms, norms);
  CHECK(max_diff(to_tensor(r), ref_r) < 1e-4);
  CHECK(max_diff(to_tensor(g), ref_g) < 1e-4);
  for (std::size_t i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 3; ++c) {
        CHECK(r.at(i, j, c, i, j, c) == doctest::Approx(k.at(i, j, c, i, j, c)).epsilon(1e-5));
        CHECK(g.at(i, j, c, i, j, c) == doctest::Approx(k.at(i, j, c, i, j, c)).epsilon(1e-5));
      }
}

TEST_CASE("update_diag") {
  KernelBlock k({0, 1}, {0, 1}, {1, 2});
  k.at(0, 0, 0, 0, 0, 0) = 4.0f;
  k.at(0, 0, 1, 0, 0, 1) = 0.0f;
  const auto d = update_diag(k);
  CHECK(d.norms(0)[0] == 2.0);
  CHECK(d.norms(0)[1] == 0.0);
  k.at(0, 0, 1, 0, 0, 1) = -1e-9f;
  CHECK(update_diag(k).norms(0)[1] == 0.0);
  k.at(0, 0, 1, 0, 0, 1) = -1.0f;
  try {
    update_diag(k);
    FAIL("expected NegativeDiagonal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NegativeDiagonal);
  }
}

TEST_CASE("diagonal blocks stay symmetric, PSD-consistent and Cauchy-Schwarz bounded") {
  std::mt19937_64 rng(99);
  for (int c = 0; c < 20; ++c) {
    const Spatial dims{std::uniform_int_distribution<int>(1, 6)(rng), std::uniform_int_distribution<int>(1, 6)(rng)};
    const auto arch = random_arch(rng, dims);
    const auto data = random_images(std::uniform_int_distribution<std::size_t>(1, 5)(rng), dims, 3, 1000 + c);
    CHECK(check_properties(data, arch).total() == 0);
  }
}

TEST_CASE("apply_layer dispatches through the operator table") {
  const auto k = random_block(8, 2, {2, 2});
  LayerOperators ops = LayerOperators::exact();
  int calls = 0;
  ops.conv = [&](const KernelBlock& in, int w, KernelBlock& out) {
    ++calls;
    conv_into(in, w, out);
  };
  KernelBlock out;
  apply_layer(ops, LayerDesc::conv(3), k, nullptr, nullptr, out);
  CHECK(calls == 1);
  CHECK_THROWS_AS(apply_layer(ops, LayerDesc::relu(), k, nullptr, nullptr, out), Error);
}
