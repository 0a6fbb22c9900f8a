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

#include "ckernel/errors.hpp"

namespace ckernel {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "Syntax";
    case ErrorKind::UnknownToken: return "UnknownToken";
    case ErrorKind::EvenConvSize: return "EvenConvSize";
    case ErrorKind::ConvTooSmall: return "ConvTooSmall";
    case ErrorKind::PoolTooSmall: return "PoolTooSmall";
    case ErrorKind::PoolIndivisible: return "PoolIndivisible";
    case ErrorKind::NotScalar: return "NotScalar";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NegativeDiagonal: return "NegativeDiagonal";
    case ErrorKind::CacheCorrupt: return "CacheCorrupt";
    case ErrorKind::Interrupted: return "Interrupted";
    case ErrorKind::Format: return "Format";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::InsufficientClass: return "InsufficientClass";
    case ErrorKind::Indivisible: return "Indivisible";
    case ErrorKind::FactorizationFailed: return "FactorizationFailed";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::optional<std::size_t> location)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), location_(location) {}

bool Error::is_validation() const noexcept {
  switch (kind_) {
    case ErrorKind::Syntax:
    case ErrorKind::UnknownToken:
    case ErrorKind::EvenConvSize:
    case ErrorKind::ConvTooSmall:
    case ErrorKind::PoolTooSmall:
    case ErrorKind::PoolIndivisible:
    case ErrorKind::NotScalar:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Parse:
    case ErrorKind::Indivisible:
    case ErrorKind::InsufficientClass:
      return true;
    default:
      return false;
  }
}

}  // namespace ckernel
