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

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "ckernel/arch.hpp"
#include "ckernel/data.hpp"
#include "ckernel/gram.hpp"
#include "ckernel/kernel_block.hpp"

namespace ckernel {

// Independent reference implementations. Nothing here shares code with the
// tiled engine or the vectorized operators: everything is 64-bit, loop-based
// and written for readability, not speed.

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
  int width = 0;  // number of random channels
  std::uint64_t seed = 0;
};

/// Monte-Carlo estimates of the ReLU-after-conv kernel for every pixel pair
/// of every image pair. Index (i, j, k) maps to row i * R * C + j * C + k.
struct McTensor {
  std::size_t images = 0;
  Spatial dims;
  int trials = 0;
  int width = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd std_error;

  std::size_t index(std::size_t i, int j, int k) const {
    return (i * static_cast<std::size_t>(dims.rows) + j) * static_cast<std::size_t>(dims.cols) + k;
  }
  McEstimate at(std::size_t i, int j, int k, std::size_t l, int m, int n) const;
};

/// One random network per trial: W has i.i.d. N(0, 2/D4) entries (the factor
/// 2 is what makes E[relu relu] equal the normalized arccosine dual), the
/// feature map is relu(W * patch(U)) with zero-padded (2w+1)^2 patches, and
/// each trial yields sum_c psi[i,j,k,c] psi[l,m,n,c]. Trials are seeded with
/// derive_seed(seed, trial) and reduced in a fixed order, so the result does
/// not depend on `threads`.
McTensor mc_relu_conv(const ImageDataset& images, int w, int trials, int width, std::uint64_t seed,
                      unsigned threads = 0);

/// Dual activations by quadrature: sqrt(2) relu and exp(x - 1).
double quad_dual_relu(double rho);
double quad_dual_gauss(double rho);
/// The closed forms they are checked against.
double closed_dual_relu(double rho);
double closed_dual_gauss(double rho);

/// Dense 64-bit rank-6 tensor [NA, R, C, NB, R, C].
struct Tensor6 {
  std::size_t na = 0;
  std::size_t nb = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor6() = default;
  Tensor6(std::size_t na, std::size_t nb, int rows, int cols);
  double& operator()(std::size_t i, int j, int k, std::size_t l, int m, int n);
  double operator()(std::size_t i, int j, int k, std::size_t l, int m, int n) const;
};

Tensor6 to_tensor(const KernelBlock& block);

Tensor6 naive_input(const ImageDataset& a, const ImageDataset& b);
Tensor6 naive_conv(const Tensor6& in, int w);
Tensor6 naive_pool(const Tensor6& in, int wr, int wc);
Tensor6 naive_global_pool(const Tensor6& in);
/// Norms are [NA, R, C] and [NB, R, C] flattened.
Tensor6 naive_relu(const Tensor6& in, const std::vector<double>& norms_a, const std::vector<double>& norms_b);
Tensor6 naive_gauss(const Tensor6& in, const std::vector<double>& norms_a, const std::vector<double>& norms_b);
/// sqrt(max(0, T[i,j,k,i,j,k])) of a square tensor.
std::vector<double> naive_norms(const Tensor6& square);

/// Runs the whole pipeline on the concatenation [A; B] as one square tensor
/// (so every norm comes from the same tensor) and extracts the A x B block.
GramMatrix naive_compose(const ImageDataset& a, const ImageDataset& b, const ArchSpec& arch);

/// N refits on the (N-1) x (N-1) systems via an explicit inverse.
Eigen::MatrixXd brute_loo(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda);

}  // namespace ckernel
