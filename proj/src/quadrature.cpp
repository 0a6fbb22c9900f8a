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

#include "ckernel/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ckernel/errors.hpp"

namespace ckernel {

namespace {

QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "Jacobi eigensolve failed");
  QuadratureRule rule;
  const Eigen::Index n = diag.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = solver.eigenvectors()(0, i);
    rule.nodes.push_back(solver.eigenvalues()(i));
    rule.weights.push_back(mu0 * v * v);
  }
  return rule;
}

void check_nodes(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "quadrature needs at least one node");
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  check_nodes(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(diag, off, 2.0);
}

QuadratureRule gauss_laguerre(int n) {
  check_nodes(n);
  Eigen::VectorXd diag(n), off(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
  for (int k = 1; k < n; ++k) off(k - 1) = k;
  return golub_welsch(diag, off, 1.0);
}

QuadratureRule gauss_hermite(int n) {
  check_nodes(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(k / 2.0);
  return golub_welsch(diag, off, std::sqrt(std::numbers::pi));
}

double dual_activation_polar(const Activation& s, double rho, int radial_nodes, int angular_nodes) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw Error(ErrorKind::InvalidArgument, "correlation must lie in [-1, 1]");
  constexpr double pi = std::numbers::pi;
  const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  // X = z1, Y = rho z1 + c z2 with (z1, z2) = r (cos t, sin t).
  std::vector<double> breaks{0.0, pi / 2, 3 * pi / 2, 2 * pi};
  for (double b : {std::atan2(-rho, c), std::atan2(-rho, c) + pi}) {
    b = std::fmod(b, 2 * pi);
    if (b < 0) b += 2 * pi;
    breaks.push_back(b);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return b - a < 1e-15; }),
               breaks.end());

  const auto radial = gauss_laguerre(radial_nodes);
  const auto angular = gauss_legendre(angular_nodes);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double half = 0.5 * (breaks[p + 1] - breaks[p]);
    const double mid = 0.5 * (breaks[p + 1] + breaks[p]);
    if (half <= 0) continue;
    double piece = 0.0;
    for (std::size_t a = 0; a < angular.nodes.size(); ++a) {
      const double t = mid + half * angular.nodes[a];
      const double ux = std::cos(t), uy = rho * std::cos(t) + c * std::sin(t);
      double inner = 0.0;
      for (std::size_t q = 0; q < radial.nodes.size(); ++q) {
        const double r = std::sqrt(2.0 * radial.nodes[q]);
        inner += radial.weights[q] * s(r * ux) * s(r * uy);
      }
      piece += angular.weights[a] * inner;
    }
    total += half * piece;
  }
  return total / (2 * pi);
}

double dual_activation_hermite(const Activation& s, double rho, int nodes) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw Error(ErrorKind::InvalidArgument, "correlation must lie in [-1, 1]");
  const auto rule = gauss_hermite(nodes);
  const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  double total = 0.0;
  for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
    const double z1 = std::sqrt(2.0) * rule.nodes[a];
    const double sx = s(z1);
    for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
      const double z2 = std::sqrt(2.0) * rule.nodes[b];
      total += rule.weights[a] * rule.weights[b] * sx * s(rho * z1 + c * z2);
    }
  }
  return total / std::numbers::pi;
}

}  // namespace ckernel
