#pragma once

#include <stdexcept>
#include <string>

namespace cayley {

/// Base class for every error raised by the library. The CLI maps each
/// subclass onto a distinct exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state vector that does not encode a vertex of the graph.
class EncodingError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the operation's domain (bad generator index, wrong
/// family, zero-probability query, determinant != 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf in a score, loss or intermediate activation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed checkpoint, table or text file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A memory or state-count budget would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration key or missing required option.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class ExitStatus : int {
  kSuccess = 0,
  kFailure = 1,
  kUsage = 2,
  kFormat = 3,
  kResource = 4,
  kNumeric = 5,
};

ExitStatus exit_status_for(const std::exception& e) noexcept;

}  // namespace cayley
