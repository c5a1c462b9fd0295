// Copyright (c) 2026, the cocodist authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COCODIST_ERROR_HPP_
#define COCODIST_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cocodist {

// Base type for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. byte_offset() is the position reported by the
// JSON parser (0 when structural validation failed after parsing).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset = 0)
      : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Dangling or duplicate id references, inconsistent records.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Mismatched image/kernel/mask dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Out-of-domain scalar argument (kernel length, radius, quality, level).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Degenerate polygon input.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// RLE run list whose total does not cover the mask.
class LengthError : public Error {
 public:
  using Error::Error;
};

// Field value outside its documented range (scores, bbox extents).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Filesystem and codec failures; the message names the file.
class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid mixing-plan request (fractions summing past 1).
class PlanError : public Error {
 public:
  using Error::Error;
};

// Statistics over an empty sample.
class StatsError : public Error {
 public:
  using Error::Error;
};

// Robustness ratio against a zero baseline.
class UndefinedRateError : public Error {
 public:
  using Error::Error;
};

}  // namespace cocodist

#endif  // COCODIST_ERROR_HPP_
