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

#include <string>
#include <string_view>
#include <vector>

namespace ckernel {

enum class LayerKind { InputKernel, Conv, Pool, ReluEmbed, GaussEmbed, GlobalPool };

std::string_view to_string(LayerKind kind);

/// One operator in an architecture. Conv stores its half-width (side 3 is
/// half-width 1); Pool stores the pooling width; the rest carry no parameter.
class LayerDesc {
 public:
  static LayerDesc conv(int side);
  static LayerDesc pool(int width);
  static LayerDesc relu() { return LayerDesc(LayerKind::ReluEmbed, 1); }
  static LayerDesc gauss() { return LayerDesc(LayerKind::GaussEmbed, 1); }
  static LayerDesc global_pool() { return LayerDesc(LayerKind::GlobalPool, 1); }

  LayerKind kind() const { return kind_; }
  /// Conv half-width or pool width; 1 for parameterless layers.
  int width() const { return width_; }
  /// Side length as written in the DSL (conv only).
  int conv_side() const { return 2 * width_ + 1; }
  bool is_embedding() const { return kind_ == LayerKind::ReluEmbed || kind_ == LayerKind::GaussEmbed; }

  friend bool operator==(const LayerDesc&, const LayerDesc&) = default;

 private:
  LayerDesc(LayerKind kind, int width) : kind_(kind), width_(width) {}

  LayerKind kind_;
  int width_;
};

/// Ordered operator list applied after the implicit input kernel.
struct ArchSpec {
  std::string name;
  std::vector<LayerDesc> layers;

  /// Layer equality only; the name is a label.
  bool same_layers(const ArchSpec& other) const { return layers == other.layers; }
};

struct Spatial {
  int rows = 0;
  int cols = 0;
  friend bool operator==(const Spatial&, const Spatial&) = default;
};

struct ValidationReport {
  Spatial input;
  /// Spatial dims after each layer, parallel to ArchSpec::layers.
  std::vector<Spatial> stage_dims;
  Spatial final_dims;
  bool flattens_to_scalar = false;
};

/// Parses the line-oriented DSL. Throws Error with a 1-based line location.
ArchSpec parse_arch(std::string_view text, std::string name = {});
ArchSpec load_arch_file(const std::string& path);

/// Simulates spatial dims through the layers. Throws Error(PoolIndivisible)
/// with the 0-based layer index when a pool does not divide the current dims.
ValidationReport validate_arch(const ArchSpec& spec, Spatial input);

/// Canonical text: one layer per line, single space, trailing newline.
std::string render_arch(const ArchSpec& spec);

}  // namespace ckernel
