#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace squirrels {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the supported numerical range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or undersized grids, windows or options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input that violates a documented precondition (e.g. a non-Hermitian matrix).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a rate or index function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Request that would exceed the dense-assembly limits.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis required by an estimate does not hold on the sampled data.
class HypothesisError : public Error {
 public:
  HypothesisError(const std::string& what, double eps_lo, double eps_hi)
      : Error(what), eps_lo_(eps_lo), eps_hi_(eps_hi) {}
  double eps_lo() const noexcept { return eps_lo_; }
  double eps_hi() const noexcept { return eps_hi_; }

 private:
  double eps_lo_;
  double eps_hi_;
};

/// File could not be read, written or decoded.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// An iterative method ran out of iterations.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace squirrels
