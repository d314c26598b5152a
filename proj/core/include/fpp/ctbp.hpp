#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fpp/discrete.hpp"
#include "fpp/rng.hpp"
#include "fpp/weights.hpp"

namespace fpp {

/// Every constant of the hopcount / weight limit theorems for one
/// (mu, nu, G) triple, plus the residuals of the identities checked while
/// computing them.
struct CtbpConstants {
  double mu = 0.0;            // mean degree
  double nu = 0.0;            // mean offspring of the size-biased law
  double alpha = 0.0;         // Malthusian rate
  double nu_bar = 0.0;        // mean of the stable-age law
  double sigma_bar_sq = 0.0;  // variance of the stable-age law
  double gamma = 0.0;         // 1 / (alpha nu_bar)
  double beta = 0.0;          // sigma_bar^2 / (nu_bar^3 alpha)
  double f_R0 = 0.0;          // residual density at 0, by quadrature
  double B = 0.0;             // int F_R(z) e^{-alpha z} dz, by quadrature
  double c = 0.0;             // log(mu (nu-1)^2 / (nu alpha nu_bar))

  double malthusian_residual = 0.0;  // nu * LS(alpha) - 1
  double f_R0_residual = 0.0;        // f_R0 - alpha / (nu - 1)
  double B_residual = 0.0;           // B - nu_bar / (nu - 1)

  /// Expected e^{-alpha t}|BP(t)| for a process started from one newborn
  /// individual: (nu - 1) / (alpha nu nu_bar).
  double growth_amplitude() const { return (nu - 1.0) / (alpha * nu * nu_bar); }
};

/// int_0^inf e^{-s t} dG(t), for s > 0.
double laplace_stieltjes(const WeightDistribution& dist, double s);

/// The unique alpha > 0 with nu * LS(alpha) = 1. Throws SubcriticalError for nu <= 1.
double solve_malthusian(double nu, const WeightDistribution& dist);

struct StableAgeMoments {
  double nu_bar;
  double sigma_bar_sq;
};

/// Mean and variance of the tilted law nu e^{-alpha y} dG(y).
StableAgeMoments stable_age_moments(double nu, double alpha, const WeightDistribution& dist);

/// Stationary residual lifetime law of an alive individual.
class ResidualLaw {
 public:
  ResidualLaw(const WeightDistribution& dist, double alpha);

  double alpha() const noexcept { return alpha_; }
  double density(double x) const;
  double cdf(double x) const;
  /// Normaliser int_0^inf e^{-alpha y} (1 - G(y)) dy.
  double normaliser() const noexcept { return normaliser_; }

  /// Tabulated CDF on [0, upper] with `points` knots, for fast repeated use
  /// (KS tests, sampling).
  class Table {
   public:
    double cdf(double x) const;
    double sample(Rng& rng) const;
    double upper() const noexcept { return xs_.back(); }

   private:
    friend class ResidualLaw;
    std::vector<double> xs_;
    std::vector<double> cdf_;
  };
  Table tabulate(std::size_t points = 4097) const;

 private:
  WeightDistribution dist_;
  double alpha_;
  double normaliser_;
};

/// int_0^inf F_R(z) e^{-alpha z} dz by nested quadrature.
double residual_laplace_integral(const ResidualLaw& law);

/// Composes the root finder, the stable-age moments and the residual law.
CtbpConstants compute_constants(double mu, double nu, const WeightDistribution& dist);

/// Flat "key value" report lines, and a JSON object with the same keys.
void write_constants_text(std::ostream& out, const CtbpConstants& c);
std::string constants_json(const CtbpConstants& c, int indent = 2);

// -- branching process simulation ------------------------------------------

struct BpConfig {
  DiscreteLaw root_law;   // offspring of the root, which dies at time 0
  DiscreteLaw later_law;  // offspring of every later individual
  const WeightDistribution* lifetimes = nullptr;
  double alpha = 0.0;      // used for the martingale estimate
  double horizon = 0.0;
  bool record_trajectory = true;
  std::size_t population_cap = 10'000'000;
};

struct BpTrajectory {
  std::vector<std::pair<double, std::size_t>> alive_counts;  // (time, |BP(time)|) after each event
  std::vector<std::size_t> offspring;                        // offspring drawn at each event
  std::size_t alive_at_horizon = 0;
  double w_estimate = 0.0;  // e^{-alpha horizon} |BP(horizon)|
  bool extinct = false;
};

/// Event-driven simulation of the two-stage splitting process up to `horizon`.
BpTrajectory simulate_bp(const BpConfig& config, Rng& rng);

/// Horizon at which the expected population reaches `target` individuals.
double default_horizon(const CtbpConstants& consts, double root_mean, double target = 1e4);

struct QSamplerConfig {
  BpConfig bp;                       // root law = degree law D
  std::size_t max_rejections = 10'000;
};

/// One draw of W = lim e^{-alpha t}|BP(t)| conditioned to be positive.
double sample_martingale_limit(const QSamplerConfig& config, Rng& rng);

/// Draws of Q = (-log W1 - log W2 - Lambda + c) / alpha.
std::vector<double> sample_Q(const CtbpConstants& consts, const QSamplerConfig& config,
                             std::size_t count, Rng& rng);

/// Q from given martingale limits and Gumbel variate.
double limit_weight(const CtbpConstants& consts, double w1, double w2, double gumbel);

/// First m points t_1 < ... < t_m of the Poisson process with intensity e^t:
/// t_i = log(E_1 + ... + E_i). -t_1 is standard Gumbel.
std::vector<double> sample_ranked_gumbel(std::size_t m, Rng& rng);

}  // namespace fpp
