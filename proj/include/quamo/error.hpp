#pragma once

#include <stdexcept>
#include <string>

namespace quamo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (off-sphere quaternion, bad size, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration, skeleton or weight file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Closed-loop simulation left the numerically sane region.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace quamo
