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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ckernel {

enum class ErrorKind {
  Syntax,
  UnknownToken,
  EvenConvSize,
  ConvTooSmall,
  PoolTooSmall,
  PoolIndivisible,
  NotScalar,
  ShapeMismatch,
  NegativeDiagonal,
  CacheCorrupt,
  Interrupted,
  Format,
  Parse,
  InsufficientClass,
  Indivisible,
  FactorizationFailed,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-checkable kind and, where it makes sense, a
/// location (1-based line for the DSL and CSV, 0-based layer index for
/// validation).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<std::size_t> location = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> location() const noexcept { return location_; }

  /// Validation-type failures map to CLI exit code 2, everything else to 1.
  bool is_validation() const noexcept;

 private:
  ErrorKind kind_;
  std::optional<std::size_t> location_;
};

}  // namespace ckernel
