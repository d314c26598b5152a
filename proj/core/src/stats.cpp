#include "fpp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpp/errors.hpp"

namespace fpp {
namespace {

std::vector<double> sorted_checked(std::span<const double> xs, std::size_t min_size, const char* what) {
  if (xs.size() < min_size) {
    throw InvalidArgument(std::string(what) + " needs at least " + std::to_string(min_size) + " values");
  }
  std::vector<double> out(xs.begin(), xs.end());
  for (double x : out) {
    if (std::isnan(x)) throw InvalidArgument(std::string(what) + ": NaN in sample");
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  const std::vector<double> xs = sorted_checked(sample, 1, "KS statistic");
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double kolmogorov_survival(double x) {
  constexpr double kFloor = 1e-10;
  if (!(x > 0.0)) return 1.0;
  double p = 0.0;
  if (x < 1.0) {
    // P(K <= x) = sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)), fast for small x.
    const double a = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k < 50; ++k) {
      const double term = std::exp(-static_cast<double>((2 * k - 1) * (2 * k - 1)) * a);
      cdf += term;
      if (term < 1e-18) break;
    }
    p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * cdf;
  } else {
    double sign = 1.0;
    for (int k = 1; k < 100; ++k) {
      const double term = std::exp(-2.0 * k * k * x * x);
      p += sign * term;
      if (term < 1e-18) break;
      sign = -sign;
    }
    p *= 2.0;
  }
  return std::clamp(p, kFloor, 1.0);
}

KsResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf) {
  sorted_checked(sample, 8, "one-sample KS");
  KsResult r;
  r.d = ks_statistic(sample, cdf);
  r.p = kolmogorov_survival(std::sqrt(static_cast<double>(sample.size())) * r.d);
  return r;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  const std::vector<double> xs = sorted_checked(a, 8, "two-sample KS");
  const std::vector<double> ys = sorted_checked(b, 8, "two-sample KS");
  const auto na = static_cast<double>(xs.size());
  const auto nb = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double t = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == t) ++i;
    while (j < ys.size() && ys[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.d = d;
  r.p = kolmogorov_survival(std::sqrt(na * nb / (na + nb)) * d);
  return r;
}

double ks_critical(double n, double p) {
  if (!(n > 0.0) || !(p > 0.0) || !(p < 1.0)) throw InvalidArgument("ks_critical needs n > 0 and 0 < p < 1");
  double lo = 0.0;
  double hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_survival(mid) > p ? lo : hi) = mid;
  }
  return hi / std::sqrt(n);
}

KsResult ks_lattice(std::span<const long> sample, const std::function<double(double)>& cdf) {
  if (sample.size() < 8) throw InvalidArgument("lattice KS needs at least 8 values");
  std::vector<long> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  std::size_t i = 0;
  for (long j = xs.front() - 1; j <= xs.back(); ++j) {
    while (i < xs.size() && xs[i] <= j) ++i;
    d = std::max(d, std::abs(static_cast<double>(i) / n - cdf(static_cast<double>(j) + 0.5)));
  }
  KsResult r;
  r.d = d;
  r.p = kolmogorov_survival(std::sqrt(n) * d);
  return r;
}

MomentSummary moments(std::span<const double> xs) {
  MomentSummary m;
  m.count = xs.size();
  if (xs.empty()) return m;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  m.mean = mean;
  m.variance = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  return m;
}

RateFit fit_log_rate(std::span<const double> points, double lo, double hi, std::size_t bins) {
  if (!(hi > lo) || bins < 2) throw InvalidArgument("fit_log_rate needs lo < hi and at least two bins");
  RateFit fit;
  const double width = (hi - lo) / static_cast<double>(bins);
  fit.bin_counts.assign(bins, 0.0);
  fit.bin_centers.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) fit.bin_centers[b] = lo + (static_cast<double>(b) + 0.5) * width;
  for (double t : points) {
    if (t < lo || t >= hi) continue;
    const auto b = std::min(bins - 1, static_cast<std::size_t>((t - lo) / width));
    fit.bin_counts[b] += 1.0;
    ++fit.points;
  }
  const std::size_t nonzero = static_cast<std::size_t>(
      std::count_if(fit.bin_counts.begin(), fit.bin_counts.end(), [](double c) { return c > 0.0; }));
  if (nonzero < 2) throw InvalidArgument("too few points in the fitting window");

  // Newton steps on the Poisson log-likelihood, starting from the flat fit.
  double a = std::log(static_cast<double>(fit.points) / static_cast<double>(bins));
  double b = 0.0;
  double info[3] = {0.0, 0.0, 0.0};
  for (int it = 0; it < 100; ++it) {
    double g0 = 0.0;
    double g1 = 0.0;
    info[0] = info[1] = info[2] = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double x = fit.bin_centers[k];
      const double mu = std::exp(a + b * x);
      g0 += fit.bin_counts[k] - mu;
      g1 += (fit.bin_counts[k] - mu) * x;
      info[0] += mu;
      info[1] += mu * x;
      info[2] += mu * x * x;
    }
    const double det = info[0] * info[2] - info[1] * info[1];
    if (!(det > 0.0)) throw NumericalError("singular information matrix in rate fit", det);
    const double da = (info[2] * g0 - info[1] * g1) / det;
    const double db = (info[0] * g1 - info[1] * g0) / det;
    a += da;
    b += db;
    if (std::abs(da) + std::abs(db) < 1e-12) break;
  }
  fit.intercept = a;
  fit.slope = b;
  fit.slope_se = std::sqrt(info[0] / (info[0] * info[2] - info[1] * info[1]));
  return fit;
}

}  // namespace fpp
