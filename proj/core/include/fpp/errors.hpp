#pragma once

#include <stdexcept>
#include <string>

namespace fpp {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A configuration file or command-line value could not be parsed.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Quadrature or root finding failed to reach the requested tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// The offspring mean is at most one, so no supercritical growth exists.
class SubcriticalError : public Error {
 public:
  using Error::Error;
};

/// A simulation outgrew its configured capacity or retry budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace fpp
