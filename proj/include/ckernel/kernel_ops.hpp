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

#include <functional>

#include "ckernel/arch.hpp"
#include "ckernel/kernel_block.hpp"

namespace ckernel {

// Exact kernel-space operators on image data. Each `*_into` variant writes
// into `out` (reshaping it, reusing its storage); `out` must not alias the
// input. The value-returning forms are thin wrappers. Storage is 32-bit,
// every reduction accumulates in 64-bit.

/// K[i,j,k,l,m,n] = <a[i,j,k,:], b[l,m,n,:]>.
KernelBlock input_kernel(const ImageView& a, const ImageView& b);
void input_kernel_into(const ImageView& a, const ImageView& b, KernelBlock& out);

/// (2w+1)x(2w+1) convolution with zero padding, shape preserving.
KernelBlock conv(const KernelBlock& in, int w);
void conv_into(const KernelBlock& in, int w, KernelBlock& out);

/// Average pool over aligned w x w windows; throws PoolIndivisible.
KernelBlock pool(const KernelBlock& in, int w);
/// Rectangular variant (row width, col width); global pooling is
/// pool_into(in, rows, cols, out).
void pool_into(const KernelBlock& in, int row_width, int col_width, KernelBlock& out);

KernelBlock global_pool(const KernelBlock& in);

/// Arccosine (ReLU) embedding: (A A'/pi) (sin t + (pi - t) cos t), t the
/// clamped angle. Zero-norm entries map to 0.
KernelBlock relu_embed(const KernelBlock& in, const DiagCache& diag_a, const DiagCache& diag_b);
void relu_embed_into(const KernelBlock& in, const DiagCache& diag_a, const DiagCache& diag_b, KernelBlock& out);

/// Normalized Gaussian embedding: A A' exp(cos t - 1).
KernelBlock gauss_embed(const KernelBlock& in, const DiagCache& diag_a, const DiagCache& diag_b);
void gauss_embed_into(const KernelBlock& in, const DiagCache& diag_a, const DiagCache& diag_b, KernelBlock& out);

/// Norms from a diagonal block (range_a == range_b). Rounding below zero is
/// clamped; anything below -1e-4 * max|diag| throws NegativeDiagonal.
DiagCache update_diag(const KernelBlock& diagonal);

/// Scalar forms of the embeddings for a single entry (exact libm acos).
double relu_kernel_value(double k, double norm_a, double norm_b);
double gauss_kernel_value(double k, double norm_a, double norm_b);

/// Polynomial arccos used in the vectorized ReLU loop; |error| < 3e-8 on
/// [-1, 1] (the tabulated 2e-8 bound is slightly exceeded: 2.2e-8 measured).
double fast_acos(double x);

/// The layer-kind -> operator map driving the composition. The engine uses
/// `exact()`; alternative tables exist so the verification gates can be
/// exercised against deliberately broken operators.
struct LayerOperators {
  std::function<void(const KernelBlock&, int, KernelBlock&)> conv;
  std::function<void(const KernelBlock&, int, int, KernelBlock&)> pool;
  std::function<void(const KernelBlock&, const DiagCache&, const DiagCache&, KernelBlock&)> relu;
  std::function<void(const KernelBlock&, const DiagCache&, const DiagCache&, KernelBlock&)> gauss;

  static const LayerOperators& exact();
};

/// Applies one layer. Embeddings read `diag_a`/`diag_b`, which must be the
/// caches for the current stage.
void apply_layer(const LayerOperators& ops, const LayerDesc& layer, const KernelBlock& in, const DiagCache* diag_a,
                 const DiagCache* diag_b, KernelBlock& out);

}  // namespace ckernel
