#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fpp/quadrature.hpp"
#include "fpp/rng.hpp"

namespace fpp {

enum class WeightKind {
  exponential,          // rate lambda
  shifted_exponential,  // 1 + E/k
  power_exponential,    // E^s
  uniform,              // U(0, b)
  user_table,           // piecewise-linear quantile function
};

/// A continuous edge-weight law G on [0, inf) with density g.
///
/// Immutable once built. All member functions are const and thread-safe;
/// sampling draws from the caller's stream.
class WeightDistribution {
 public:
  struct Evaluation {
    double cdf;
    double density;
  };

  static WeightDistribution exponential(double rate);
  static WeightDistribution shifted_exponential(double k);
  static WeightDistribution power_exponential(double s);
  static WeightDistribution uniform(double b);
  /// `levels` and `quantiles` strictly increasing, levels from 0 to 1.
  static WeightDistribution from_table(std::vector<double> levels, std::vector<double> quantiles);
  /// Two-column text: probability level, quantile.
  static WeightDistribution read_table(std::istream& in);

  /// Parses "exp:1", "shifted-exp:5", "power:2", "uniform:3" or "table:PATH".
  static WeightDistribution parse(std::string_view spec);

  WeightKind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }
  std::string describe() const;

  double cdf(double x) const;
  /// 1 - G(x), computed without cancellation in the tail.
  double survival(double x) const;
  /// g(x). For power_exponential with s > 1 this is +inf at x = 0.
  double density(double x) const;
  /// G^{-1}(p) for p in (0, 1).
  double quantile(double p) const;
  /// The x with survival(x) = q, for q in (0, 1).
  double upper_quantile(double q) const;

  /// (cdf, density) at x >= 0; throws InvalidArgument for x < 0.
  Evaluation evaluate(double x) const;

  /// Inverse-CDF draw: quantile(U) with U uniform on (0, 1).
  double sample(Rng& rng) const { return quantile(rng.uniform()); }

  double support_lower() const noexcept;
  /// +inf for unbounded support.
  double support_upper() const noexcept;
  /// Points where the density is not smooth (support ends, table knots).
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

  double mean() const;
  double second_moment() const;

 private:
  WeightDistribution(WeightKind kind, double param) : kind_(kind), param_(param) {}
  void finish();

  WeightKind kind_;
  double param_;
  std::vector<double> levels_;
  std::vector<double> quantiles_;
  std::vector<double> breakpoints_;
};

/// Integral of h(t) g(t) over [from, inf).
///
/// `decay` is an exponential rate the caller guarantees h falls off with
/// (|h(t)| <~ poly(t) e^{-decay t}); together with the survival function it
/// fixes a finite truncation point beyond which the tail is below 1e-18.
double integrate_against_density(const WeightDistribution& dist,
                                 const std::function<double(double)>& h, double from = 0.0,
                                 double decay = 0.0, const QuadratureOptions& options = {});

/// Finite upper limit for integrals dominated by e^{-decay t} (1 - G(t)).
double truncation_point(const WeightDistribution& dist, double decay);

}  // namespace fpp
