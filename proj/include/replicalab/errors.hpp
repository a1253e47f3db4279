#pragma once

#include <stdexcept>
#include <string>

namespace replicalab {

/// Base class of every error raised by the library. The CLI maps the
/// subclasses onto exit codes (validation 2, scale 3, I/O 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: wrong key, malformed seed, mismatched wrapper parts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside the range an operation accepts.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input outside an operation's domain (bad sample value, empty domain, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A distribution that is not a probability vector.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Requested computation exceeds the sizes this desk-scale library supports.
class ScaleError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant (e.g. correlated sampling round budget exhausted).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace replicalab
