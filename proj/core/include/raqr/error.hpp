// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace raqr {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes are incompatible. The message names both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A numeric argument is outside the operation's domain (negative kappa,
// non-finite angle, zero reference channel, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration (P < K, mismatched checkpoint, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An iterative solver or training loop produced a non-finite value.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long iteration)
      : Error(what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

// File read/write failure; message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string shape_str(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace raqr
