// Copyright 2026 The deface-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEFACE_ERROR_HPP_
#define DEFACE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deface {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a data invariant (duplicate ids,
/// conflicting demographics, mismatched dimensions).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Precondition violation on an operation argument.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration rejected before any stage runs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace deface

#endif  // DEFACE_ERROR_HPP_
