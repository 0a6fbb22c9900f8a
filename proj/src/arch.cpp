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

#include "ckernel/arch.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ckernel/errors.hpp"

namespace ckernel {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::InputKernel: return "input";
    case LayerKind::Conv: return "conv";
    case LayerKind::Pool: return "pool";
    case LayerKind::ReluEmbed: return "relu";
    case LayerKind::GaussEmbed: return "gauss";
    case LayerKind::GlobalPool: return "gpool";
  }
  return "?";
}

LayerDesc LayerDesc::conv(int side) {
  if (side % 2 == 0) throw Error(ErrorKind::EvenConvSize, "conv size " + std::to_string(side) + " is even");
  if (side < 3) throw Error(ErrorKind::ConvTooSmall, "conv size must be at least 3, got " + std::to_string(side));
  return LayerDesc(LayerKind::Conv, (side - 1) / 2);
}

LayerDesc LayerDesc::pool(int width) {
  if (width < 2) throw Error(ErrorKind::PoolTooSmall, "pool width must be at least 2, got " + std::to_string(width));
  return LayerDesc(LayerKind::Pool, width);
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

int parse_positive(std::string_view token, std::size_t line) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value <= 0) {
    throw Error(ErrorKind::Syntax, "line " + std::to_string(line) + ": expected a positive integer, got '" +
                                       std::string(token) + "'",
                line);
  }
  return value;
}

LayerDesc parse_line(const std::vector<std::string_view>& tokens, std::size_t line) {
  const auto& op = tokens.front();
  auto expect_args = [&](std::size_t n) {
    if (tokens.size() != n + 1) {
      throw Error(ErrorKind::Syntax, "line " + std::to_string(line) + ": '" + std::string(op) + "' takes " +
                                         std::to_string(n) + " argument(s)",
                  line);
    }
  };
  // Rethrow parameter errors with the line attached.
  auto at_line = [&](auto&& make) -> LayerDesc {
    try {
      return make();
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line) + ": " + e.what(), line);
    }
  };
  if (op == "conv") {
    expect_args(1);
    int side = parse_positive(tokens[1], line);
    return at_line([&] { return LayerDesc::conv(side); });
  }
  if (op == "pool") {
    expect_args(1);
    int width = parse_positive(tokens[1], line);
    return at_line([&] { return LayerDesc::pool(width); });
  }
  if (op == "relu") {
    expect_args(0);
    return LayerDesc::relu();
  }
  if (op == "gauss") {
    expect_args(0);
    return LayerDesc::gauss();
  }
  if (op == "gpool") {
    expect_args(0);
    return LayerDesc::global_pool();
  }
  throw Error(ErrorKind::UnknownToken, "line " + std::to_string(line) + ": unknown token '" + std::string(op) + "'",
              line);
}

}  // namespace

ArchSpec parse_arch(std::string_view text, std::string name) {
  ArchSpec spec;
  spec.name = std::move(name);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = text.substr(pos, end - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) spec.layers.push_back(parse_line(split_ws(line), line_no));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return spec;
}

ArchSpec load_arch_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open arch file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_arch(buf.str(), std::filesystem::path(path).stem().string());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what(), e.location());
  }
}

ValidationReport validate_arch(const ArchSpec& spec, Spatial input) {
  if (input.rows < 1 || input.cols < 1) throw Error(ErrorKind::InvalidArgument, "spatial dims must be positive");
  ValidationReport report;
  report.input = input;
  Spatial dims = input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    switch (layer.kind()) {
      case LayerKind::Pool: {
        const int w = layer.width();
        if (dims.rows % w != 0 || dims.cols % w != 0) {
          throw Error(ErrorKind::PoolIndivisible,
                      "layer " + std::to_string(i) + " (pool " + std::to_string(w) + "): spatial dims " +
                          std::to_string(dims.rows) + "x" + std::to_string(dims.cols) + " not divisible by " +
                          std::to_string(w),
                      i);
        }
        dims = {dims.rows / w, dims.cols / w};
        break;
      }
      case LayerKind::GlobalPool:
        dims = {1, 1};
        break;
      default:
        break;
    }
    report.stage_dims.push_back(dims);
  }
  report.final_dims = dims;
  report.flattens_to_scalar = dims.rows == 1 && dims.cols == 1;
  return report;
}

std::string render_arch(const ArchSpec& spec) {
  std::string out;
  for (const auto& layer : spec.layers) {
    switch (layer.kind()) {
      case LayerKind::Conv: out += "conv " + std::to_string(layer.conv_side()); break;
      case LayerKind::Pool: out += "pool " + std::to_string(layer.width()); break;
      default: out += std::string(to_string(layer.kind())); break;
    }
    out += '\n';
  }
  return out;
}

}  // namespace ckernel
