#pragma once

#include <stdexcept>
#include <string>

namespace leakscope {

// Base of every error the library throws. The CLI maps the concrete type to
// an exit code: ValidationError -> 1, IoError -> 3.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input, violated precondition, or inconsistent data.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Filesystem failure or a file whose bytes cannot be decoded.
class IoError : public Error {
public:
  using Error::Error;
};

// Numerical failure inside an iterative routine (non-finite gradient, ...).
class NumericError : public Error {
public:
  using Error::Error;
};

} // namespace leakscope
