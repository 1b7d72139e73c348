#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mmue {

/// Base class for every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range parameters, dimension mismatches, malformed inputs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A quadrature or root-finding routine did not reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved_tolerance)
      : Error(what), achieved_tolerance_(achieved_tolerance) {}
  double achieved_tolerance() const noexcept { return achieved_tolerance_; }

 private:
  double achieved_tolerance_;
};

/// GAMP blew up. Carries the per-iteration scalar-channel variance so the
/// caller can inspect where it went wrong.
class GampDivergence : public Error {
 public:
  GampDivergence(const std::string& what, std::vector<double> mu_trajectory)
      : Error(what), mu_trajectory_(std::move(mu_trajectory)) {}
  const std::vector<double>& mu_trajectory() const noexcept { return mu_trajectory_; }

 private:
  std::vector<double> mu_trajectory_;
};

/// Errors surfaced by file parsing (CSV, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmue
