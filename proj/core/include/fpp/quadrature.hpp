#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace fpp {

struct QuadratureOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

/// Globally adaptive 7-point Gauss / 15-point Kronrod quadrature on [a, b].
///
/// The rule never evaluates the endpoints, so integrable endpoint
/// singularities (e.g. x^{-1/2} at 0) are handled by repeated bisection of the
/// offending panel. Interior `breakpoints` strictly inside (a, b) seed the
/// initial partition; kinks of the integrand should be listed there.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints = {},
                           const QuadratureOptions& options = {});

/// As `integrate`, but throws NumericalError when the tolerance is not met.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          std::span<const double> breakpoints = {},
                          const QuadratureOptions& options = {});

}  // namespace fpp
