#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fpp {

double normal_cdf(double x);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
};

/// sup |F_emp - F| over the sample; no size requirement.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// P(K > x) for the Kolmogorov distribution, clamped below at 1e-10.
double kolmogorov_survival(double x);

/// One-sample test with the asymptotic p-value at sqrt(n) D. Needs n >= 8
/// and no NaN.
KsResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample test, effective size ab / (a + b). Needs both sizes >= 8.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Smallest D rejected at level `p` for a one-sample test of size n.
double ks_critical(double n, double p);

/// KS distance for integer-valued data against a continuous approximation
/// G, comparing the empirical CDF at each integer j with G(j + 1/2).
KsResult ks_lattice(std::span<const long> sample, const std::function<double(double)>& cdf);

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::size_t count = 0;
};
MomentSummary moments(std::span<const double> xs);

struct RateFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  std::size_t points = 0;
  std::vector<double> bin_centers;
  std::vector<double> bin_counts;
};

/// Fits log E[count] = a + b t to a histogram of the points in [lo, hi)
/// by Poisson maximum likelihood (iteratively reweighted least squares).
RateFit fit_log_rate(std::span<const double> points, double lo, double hi, std::size_t bins);

}  // namespace fpp
