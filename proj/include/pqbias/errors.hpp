#pragma once

#include <stdexcept>

namespace pqbias {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration (CLI exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (exit code 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Query outside the range covered by a precomputed table (exit code 1).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Memory or size ceiling exceeded, unreadable cache (exit code 2).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A numerical target could not be met (exit code 2).
class ComputationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pqbias
