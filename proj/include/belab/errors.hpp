// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace belab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateLaw : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class BadDimension : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when an exact enumeration would exceed the atom budget.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double required)
      : Error(what), required_(required) {}

  /// Atom count the enumeration would have needed (may exceed 2^64).
  double required() const noexcept { return required_; }

 private:
  double required_;
};

}  // namespace belab
