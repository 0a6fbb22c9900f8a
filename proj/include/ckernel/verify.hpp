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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ckernel/arch.hpp"
#include "ckernel/data.hpp"
#include "ckernel/kernel_ops.hpp"

namespace ckernel {

/// Random valid architecture for `input` dims that always reduces to 1x1:
/// a mix of conv/relu/gauss/pool layers, finished with gpool when needed.
ArchSpec random_arch(std::mt19937_64& rng, Spatial input, int max_layers = 6);

/// N images with i.i.d. standard normal pixels and labels i % classes.
ImageDataset random_images(std::size_t n, Spatial dims, int channels, std::uint64_t seed, int classes = 2);

struct PropertyViolations {
  std::size_t symmetry = 0;
  std::size_t negative_diagonal = 0;
  std::size_t cauchy_schwarz = 0;
  std::size_t diagonal_preservation = 0;
  std::size_t psd = 0;
  std::size_t total() const { return symmetry + negative_diagonal + cauchy_schwarz + diagonal_preservation + psd; }
};

/// Runs `arch` over the full diagonal block of `data` and checks, after every
/// layer: block symmetry (1e-5 relative), non-negative diagonal,
/// Cauchy-Schwarz (1e-5 of the largest diagonal), embeddings preserving the
/// diagonal (1e-5 relative); and PSD of the final Gram matrix (smallest
/// eigenvalue >= -1e-5 trace / N).
PropertyViolations check_properties(const ImageDataset& data, const ArchSpec& arch,
                                    const LayerOperators& ops = LayerOperators::exact());

/// Maximum of |a - b| / max(|b|, floor) over matching entries.
double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor = 1e-12);

struct GateResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

enum class VerifyLevel { Quick, Full };

/// Operator table with a deliberately broken conv ("conv-sign" negates its
/// output). Used to check that the gates catch real bugs.
LayerOperators faulty_operators(const std::string& fault);

/// The oracle suite: quadrature duals, random-feature estimate, per-operator
/// naive references, engine vs naive composition, closed-form vs brute LOO.
std::vector<GateResult> run_verify(VerifyLevel level, const LayerOperators& ops, std::uint64_t seed,
                                   unsigned threads = 0);

}  // namespace ckernel
