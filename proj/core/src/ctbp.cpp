#include "fpp/ctbp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "fpp/errors.hpp"

namespace fpp {
namespace {

const QuadratureOptions kTight{1e-16, 1e-13, 6000};

std::vector<double> shifted_breakpoints(const WeightDistribution& dist, double shift) {
  std::vector<double> pts = dist.breakpoints();
  for (double b : dist.breakpoints()) pts.push_back(b - shift);
  return pts;
}

}  // namespace

double laplace_stieltjes(const WeightDistribution& dist, double s) {
  if (!(s > 0.0)) throw InvalidArgument("Laplace-Stieltjes transform needs s > 0");
  return integrate_against_density(dist, [s](double t) { return std::exp(-s * t); }, 0.0, s, kTight);
}

double solve_malthusian(double nu, const WeightDistribution& dist) {
  if (!(nu > 1.0)) {
    std::ostringstream os;
    os << "offspring mean nu = " << nu << " <= 1: no positive Malthusian root (need nu > 1)";
    throw SubcriticalError(os.str());
  }
  auto excess = [&](double a) { return nu * laplace_stieltjes(dist, a) - 1.0; };
  double lo = 0.0;
  double hi = 1.0;
  while (excess(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("Malthusian root not bracketed", hi);
  }
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  const double alpha = 0.5 * (lo + hi);
  const double residual = excess(alpha);
  if (std::abs(residual) > 1e-10) throw NumericalError("Malthusian equation residual too large", residual);
  return alpha;
}

StableAgeMoments stable_age_moments(double nu, double alpha, const WeightDistribution& dist) {
  if (!(alpha > 0.0)) throw InvalidArgument("stable-age moments need alpha > 0");
  const double residual = nu * laplace_stieltjes(dist, alpha) - 1.0;
  if (std::abs(residual) > 1e-8) {
    throw InvalidArgument("(nu, alpha) do not satisfy the Malthusian equation: residual " +
                          std::to_string(residual));
  }
  auto tilted = [&](const std::function<double(double)>& h) {
    return nu * integrate_against_density(
                    dist, [&](double t) { return h(t) * std::exp(-alpha * t); }, 0.0, alpha, kTight);
  };
  const double mean = tilted([](double t) { return t; });
  const double var = tilted([mean](double t) { return (t - mean) * (t - mean); });
  if (!(mean > 0.0) || !(var > 0.0)) throw NumericalError("degenerate stable-age law", var);
  return {mean, var};
}

ResidualLaw::ResidualLaw(const WeightDistribution& dist, double alpha) : dist_(dist), alpha_(alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("residual law needs alpha > 0");
  const double upper = truncation_point(dist_, alpha_);
  normaliser_ = integrate_or_throw(
      [this](double y) { return std::exp(-alpha_ * y) * dist_.survival(y); }, 0.0, upper,
      dist_.breakpoints(), kTight);
}

double ResidualLaw::density(double x) const {
  if (x < 0.0) return 0.0;
  const double num = integrate_against_density(
      dist_, [this, x](double t) { return std::exp(-alpha_ * (t - x)); }, x, alpha_, kTight);
  return num / normaliser_;
}

double ResidualLaw::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  const double upper = truncation_point(dist_, alpha_);
  auto pts = shifted_breakpoints(dist_, x);
  pts.push_back(x);
  const QuadratureResult r = integrate(
      [this, x](double y) {
        return std::exp(-alpha_ * y) * (dist_.survival(y) - dist_.survival(x + y));
      },
      0.0, upper, pts, kTight);
  // The tight relative target occasionally stalls at round-off; 1e-11 absolute is ample for a CDF.
  if (!r.converged && r.error > 1e-11) throw NumericalError("residual CDF quadrature did not converge", r.error);
  return std::min(1.0, r.value / normaliser_);
}

ResidualLaw::Table ResidualLaw::tabulate(std::size_t points) const {
  if (points < 16) throw InvalidArgument("residual table needs at least 16 points");
  double upper = dist_.support_upper();
  if (!std::isfinite(upper)) upper = dist_.upper_quantile(1e-13);
  const double bulk = std::min(upper, std::isfinite(dist_.support_upper())
                                          ? dist_.support_upper()
                                          : dist_.upper_quantile(1e-2));
  Table t;
  const std::size_t half = points / 2;
  // Quadratic spacing in the bulk: the density may have a square-root kink at 0.
  for (std::size_t i = 0; i <= half; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(half);
    t.xs_.push_back(bulk * u * u);
  }
  if (upper > bulk) {
    const double ratio = std::pow(upper / bulk, 1.0 / static_cast<double>(points - half - 1));
    double x = bulk;
    for (std::size_t i = half + 1; i < points; ++i) {
      x *= ratio;
      t.xs_.push_back(x);
    }
  }
  t.cdf_.reserve(t.xs_.size());
  double prev = 0.0;
  for (double x : t.xs_) {
    prev = std::max(prev, cdf(x));
    t.cdf_.push_back(prev);
  }
  return t;
}

double ResidualLaw::Table::cdf(double x) const {
  if (x <= xs_.front()) return 0.0;
  if (x >= xs_.back()) return 1.0;
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const auto i = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double frac = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
}

double ResidualLaw::Table::sample(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return xs_.front();
  if (it == cdf_.end()) return xs_.back();
  const auto i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  const double span = cdf_[i + 1] - cdf_[i];
  const double frac = span > 0.0 ? (u - cdf_[i]) / span : 0.0;
  return xs_[i] + frac * (xs_[i + 1] - xs_[i]);
}

double residual_laplace_integral(const ResidualLaw& law) {
  const double a = law.alpha();
  const QuadratureOptions outer{1e-15, 1e-12, 4000};
  return integrate_or_throw([&](double z) { return law.cdf(z) * std::exp(-a * z); }, 0.0, 45.0 / a, {},
                            outer);
}

CtbpConstants compute_constants(double mu, double nu, const WeightDistribution& dist) {
  if (!(mu > 0.0)) throw InvalidArgument("mean degree must be positive");
  CtbpConstants c;
  c.mu = mu;
  c.nu = nu;
  c.alpha = solve_malthusian(nu, dist);
  const StableAgeMoments m = stable_age_moments(nu, c.alpha, dist);
  c.nu_bar = m.nu_bar;
  c.sigma_bar_sq = m.sigma_bar_sq;
  c.gamma = 1.0 / (c.alpha * c.nu_bar);
  c.beta = c.sigma_bar_sq / (c.nu_bar * c.nu_bar * c.nu_bar * c.alpha);
  c.c = std::log(mu * (nu - 1.0) * (nu - 1.0) / (nu * c.alpha * c.nu_bar));

  const ResidualLaw residual(dist, c.alpha);
  c.f_R0 = residual.density(0.0);
  c.B = residual_laplace_integral(residual);

  c.malthusian_residual = nu * laplace_stieltjes(dist, c.alpha) - 1.0;
  c.f_R0_residual = c.f_R0 - c.alpha / (nu - 1.0);
  c.B_residual = c.B - c.nu_bar / (nu - 1.0);
  return c;
}

namespace {

std::vector<std::pair<const char*, double>> constant_fields(const CtbpConstants& c) {
  return {{"mu", c.mu},
          {"nu", c.nu},
          {"alpha", c.alpha},
          {"nu_bar", c.nu_bar},
          {"sigma_bar_sq", c.sigma_bar_sq},
          {"gamma", c.gamma},
          {"beta", c.beta},
          {"c", c.c},
          {"f_R0", c.f_R0},
          {"B", c.B},
          {"malthusian_residual", c.malthusian_residual},
          {"f_R0_residual", c.f_R0_residual},
          {"B_residual", c.B_residual}};
}

}  // namespace

void write_constants_text(std::ostream& out, const CtbpConstants& c) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(12);
  for (const auto& [key, value] : constant_fields(c)) out << std::left << std::setw(20) << key << ' ' << value << '\n';
  out.flags(flags);
  out.precision(prec);
}

std::string constants_json(const CtbpConstants& c, int indent) {
  nlohmann::ordered_json j;
  for (const auto& [key, value] : constant_fields(c)) j[key] = value;
  return j.dump(indent);
}

// -- branching process ------------------------------------------------------

BpTrajectory simulate_bp(const BpConfig& config, Rng& rng) {
  if (!(config.horizon > 0.0)) throw InvalidArgument("branching process horizon must be positive");
  if (config.lifetimes == nullptr) throw InvalidArgument("branching process needs a lifetime law");
  const WeightDistribution& life = *config.lifetimes;

  BpTrajectory out;
  std::priority_queue<double, std::vector<double>, std::greater<>> deaths;

  const std::size_t root_children = config.root_law.sample(rng);
  out.offspring.push_back(root_children);
  for (std::size_t i = 0; i < root_children; ++i) deaths.push(life.sample(rng));
  if (config.record_trajectory) out.alive_counts.emplace_back(0.0, deaths.size());

  while (!deaths.empty() && deaths.top() <= config.horizon) {
    const double t = deaths.top();
    deaths.pop();
    const std::size_t children = config.later_law.sample(rng);
    for (std::size_t i = 0; i < children; ++i) deaths.push(t + life.sample(rng));
    if (deaths.size() > config.population_cap) {
      throw CapacityError("branching process population exceeded " +
                          std::to_string(config.population_cap) + " before the horizon");
    }
    if (config.record_trajectory) {
      out.offspring.push_back(children);
      out.alive_counts.emplace_back(t, deaths.size());
    }
  }
  out.alive_at_horizon = deaths.size();
  out.extinct = deaths.empty();
  out.w_estimate = std::exp(-config.alpha * config.horizon) * static_cast<double>(deaths.size());
  return out;
}

double default_horizon(const CtbpConstants& consts, double root_mean, double target) {
  const double scale = root_mean * consts.growth_amplitude();
  const double t = std::log(target / scale) / consts.alpha;
  return t > 0.0 ? t : 1.0 / consts.alpha;
}

double sample_martingale_limit(const QSamplerConfig& config, Rng& rng) {
  BpConfig bp = config.bp;
  bp.record_trajectory = false;
  for (std::size_t attempt = 0; attempt < config.max_rejections; ++attempt) {
    const BpTrajectory run = simulate_bp(bp, rng);
    if (run.w_estimate > 0.0) return run.w_estimate;
  }
  throw CapacityError("martingale limit: " + std::to_string(config.max_rejections) +
                      " consecutive extinctions (offspring mean too close to 1?)");
}

double limit_weight(const CtbpConstants& consts, double w1, double w2, double gumbel) {
  return (-std::log(w1) - std::log(w2) - gumbel + consts.c) / consts.alpha;
}

std::vector<double> sample_Q(const CtbpConstants& consts, const QSamplerConfig& config,
                             std::size_t count, Rng& rng) {
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double w1 = sample_martingale_limit(config, rng);
    const double w2 = sample_martingale_limit(config, rng);
    out.push_back(limit_weight(consts, w1, w2, rng.gumbel()));
  }
  return out;
}

std::vector<double> sample_ranked_gumbel(std::size_t m, Rng& rng) {
  if (m == 0) throw InvalidArgument("need at least one ranked point");
  std::vector<double> t(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sum += rng.exponential();
    t[i] = std::log(sum);
  }
  return t;
}

}  // namespace fpp
