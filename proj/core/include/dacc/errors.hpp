#pragma once

#include <stdexcept>
#include <string>

namespace dacc {

/// Bad input: wrong shapes, malformed files, invalid configuration.
/// The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shape contract violation between tensors.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// NaN/Inf produced during a forward or backward pass, or another
/// numerical failure at run time. The CLI maps these to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dacc
