#pragma once

#include <stdexcept>
#include <string>

namespace rntk {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied something invalid: bad shapes, bad hyperparameters,
/// malformed files. The CLI maps this to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A computation produced or received non-finite values, or a linear
/// system could not be solved reliably. The CLI maps this to exit code 1.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace rntk
