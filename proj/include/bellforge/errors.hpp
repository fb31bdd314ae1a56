#pragma once

#include <stdexcept>
#include <string>

namespace bellforge {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or schema violation. The CLI maps this to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public InputError {
 public:
  using InputError::InputError;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

/// A numerical tolerance was not met. The CLI maps this to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GridResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace bellforge
