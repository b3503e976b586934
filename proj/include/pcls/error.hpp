#pragma once

#include <stdexcept>
#include <string>

namespace pcls {

// Base for every error raised by the library. Each subclass maps to one CLI
// exit code (see tools/pcls.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the operation's domain (t <= 0, interval not in block, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Floating-point range exceeded, e.g. e^{lambda v} overflowing.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Eigen-solver failure, reconstruction residue above tolerance, ...
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Frequency grid does not carry enough spectral mass.
class CoverageError : public NumericError {
 public:
  CoverageError(const std::string& what, double tail_mass)
      : NumericError(what), tail_mass_(tail_mass) {}
  double tail_mass() const noexcept { return tail_mass_; }

 private:
  double tail_mass_;
};

/// Interval endpoints do not fall on grid cell edges.
class AlignmentError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Assembled covariance has an eigenvalue below -tol * trace.
class NonPsdModel : public Error {
 public:
  NonPsdModel(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class UnsupportedMethod : public Error {
 public:
  using Error::Error;
};

/// Model-spec validation failure; `path` is a JSON path such as "pc.rho".
class SpecError : public Error {
 public:
  SpecError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)), message_(message) {}
  const std::string& path() const noexcept { return path_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string path_;
  std::string message_;
};

}  // namespace pcls
