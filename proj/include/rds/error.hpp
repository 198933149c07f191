#pragma once

#include <stdexcept>
#include <string>

namespace rds {

// Base of every error raised by the library. The CLI maps the subclasses onto
// exit codes (validation 1, resource 2, anything else 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed config, out-of-domain parameter, invalid file.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Parameter outside an operation's mathematical domain (e.g. sigma < sigma0).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A tail sum that does not converge at the requested exponent.
class DivergenceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Index past the end of a finite sequence.
class OutOfRangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Term budget or enumeration size exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace rds
