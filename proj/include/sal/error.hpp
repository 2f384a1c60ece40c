#pragma once

#include <stdexcept>
#include <string>

namespace sal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension or shape mismatch between arguments.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (non-finite objective, singular system, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace sal
