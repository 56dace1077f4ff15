/* Copyright 2026 The IAM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#ifndef IAM_ERRORS_HPP_
#define IAM_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iam {

// Shapes or channel counts that do not fit the operation.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scalar arguments outside their documented domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerically undefined results (zero norm, zero energy).
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or truncated file content. `offset` is the byte position at
// which parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Well-formed input that uses a feature outside the supported subset.
class UnsupportedFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iam

#endif  // IAM_ERRORS_HPP_
