// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace molfield {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

/// Element symbol or property missing from the element table.
class UnknownElementError : public Error {
 public:
  using Error::Error;
};

/// Tensor, grid or latent dimensions that do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (grid, channel spec, network, training).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Binary stream problems: bad magic, version, truncation.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace molfield
