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
#include <vector>

namespace ckernel {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch rules from the symmetric tridiagonal Jacobi matrix.

/// Integrates f over [-1, 1].
QuadratureRule gauss_legendre(int n);
/// Integrates exp(-t) f(t) over [0, inf).
QuadratureRule gauss_laguerre(int n);
/// Integrates exp(-x^2) f(x) over the real line.
QuadratureRule gauss_hermite(int n);

using Activation = std::function<double(double)>;

/// E[s(X) s(Y)] for standard normals with correlation rho, in polar form:
/// Gauss-Laguerre in r^2/2 times Gauss-Legendre in the angle, with the angle
/// split wherever X or Y changes sign so that kinked activations are
/// integrated piecewise-smoothly.
double dual_activation_polar(const Activation& s, double rho, int radial_nodes = 64, int angular_nodes = 64);

/// The same expectation with a tensor Gauss-Hermite rule on the Cartesian
/// grid. Kept as a cross-check; it converges slowly across a kink.
double dual_activation_hermite(const Activation& s, double rho, int nodes = 64);

}  // namespace ckernel
