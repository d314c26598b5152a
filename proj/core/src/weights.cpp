#include "fpp/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "fpp/errors.hpp"

namespace fpp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailSurvival = 1e-18;
constexpr double kTailExponent = 45.0;

double parse_positive(std::string_view text, std::string_view what) {
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("cannot parse " + std::string(what) + " from '" + s + "'");
  }
  if (used != s.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be a positive number, got '" + s + "'");
  }
  return v;
}

}  // namespace

WeightDistribution WeightDistribution::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("exponential rate must be positive");
  WeightDistribution d(WeightKind::exponential, rate);
  d.finish();
  return d;
}

WeightDistribution WeightDistribution::shifted_exponential(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("shifted exponential k must be positive");
  WeightDistribution d(WeightKind::shifted_exponential, k);
  d.finish();
  return d;
}

WeightDistribution WeightDistribution::power_exponential(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("power exponent s must be positive");
  WeightDistribution d(WeightKind::power_exponential, s);
  d.finish();
  return d;
}

WeightDistribution WeightDistribution::uniform(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw InvalidArgument("uniform upper bound must be positive");
  WeightDistribution d(WeightKind::uniform, b);
  d.finish();
  return d;
}

WeightDistribution WeightDistribution::from_table(std::vector<double> levels,
                                                  std::vector<double> quantiles) {
  if (levels.size() != quantiles.size() || levels.size() < 2) {
    throw InvalidArgument("quantile table needs at least two (level, quantile) rows");
  }
  if (levels.front() != 0.0 || levels.back() != 1.0) {
    throw InvalidArgument("quantile table levels must start at 0 and end at 1");
  }
  if (quantiles.front() < 0.0) throw InvalidArgument("quantile table has negative weights");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) {
      throw InvalidArgument("quantile table levels are not strictly increasing");
    }
    // Equal quantiles at distinct levels would be an atom.
    if (!(quantiles[i] > quantiles[i - 1])) {
      throw InvalidArgument("quantile table quantiles are not strictly increasing");
    }
  }
  WeightDistribution d(WeightKind::user_table, 0.0);
  d.levels_ = std::move(levels);
  d.quantiles_ = std::move(quantiles);
  d.finish();
  return d;
}

WeightDistribution WeightDistribution::read_table(std::istream& in) {
  std::vector<double> levels;
  std::vector<double> quantiles;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double p = 0.0;
    double q = 0.0;
    if (!(row >> p)) continue;
    if (!(row >> q)) {
      throw InvalidArgument("quantile table line " + std::to_string(lineno) + ": expected two columns");
    }
    levels.push_back(p);
    quantiles.push_back(q);
  }
  return from_table(std::move(levels), std::move(quantiles));
}

WeightDistribution WeightDistribution::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("weight law '" + std::string(spec) + "' must look like kind:parameter");
  }
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view arg = spec.substr(colon + 1);
  if (kind == "exp" || kind == "exponential") return exponential(parse_positive(arg, "rate"));
  if (kind == "shifted-exp" || kind == "shifted_exponential") {
    return shifted_exponential(parse_positive(arg, "k"));
  }
  if (kind == "power" || kind == "power-exp" || kind == "power_exponential") {
    return power_exponential(parse_positive(arg, "s"));
  }
  if (kind == "uniform") return uniform(parse_positive(arg, "upper bound"));
  if (kind == "table") {
    std::ifstream in{std::string(arg)};
    if (!in) throw InvalidArgument("cannot open quantile table '" + std::string(arg) + "'");
    return read_table(in);
  }
  throw InvalidArgument("unknown weight law '" + std::string(kind) + "'");
}

std::string WeightDistribution::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case WeightKind::exponential: os << "exp:" << param_; break;
    case WeightKind::shifted_exponential: os << "shifted-exp:" << param_; break;
    case WeightKind::power_exponential: os << "power:" << param_; break;
    case WeightKind::uniform: os << "uniform:" << param_; break;
    case WeightKind::user_table: os << "table(" << levels_.size() << " rows)"; break;
  }
  return os.str();
}

void WeightDistribution::finish() {
  breakpoints_.clear();
  switch (kind_) {
    case WeightKind::shifted_exponential: breakpoints_ = {1.0}; break;
    case WeightKind::uniform: breakpoints_ = {0.0, param_}; break;
    case WeightKind::user_table: breakpoints_ = quantiles_; break;
    default: breakpoints_ = {0.0}; break;
  }
  const double mass = integrate_against_density(*this, [](double) { return 1.0; });
  if (std::abs(mass - 1.0) > 1e-8) {
    throw InvalidArgument("weight density integrates to " + std::to_string(mass) + ", not 1");
  }
}

double WeightDistribution::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  switch (kind_) {
    case WeightKind::exponential: return -std::expm1(-param_ * x);
    case WeightKind::shifted_exponential: return x <= 1.0 ? 0.0 : -std::expm1(-param_ * (x - 1.0));
    case WeightKind::power_exponential: return -std::expm1(-std::pow(x, 1.0 / param_));
    case WeightKind::uniform: return std::min(1.0, x / param_);
    case WeightKind::user_table: {
      if (x <= quantiles_.front()) return 0.0;
      if (x >= quantiles_.back()) return 1.0;
      const auto it = std::upper_bound(quantiles_.begin(), quantiles_.end(), x);
      const auto i = static_cast<std::size_t>(it - quantiles_.begin()) - 1;
      const double frac = (x - quantiles_[i]) / (quantiles_[i + 1] - quantiles_[i]);
      return levels_[i] + frac * (levels_[i + 1] - levels_[i]);
    }
  }
  return 0.0;
}

double WeightDistribution::survival(double x) const {
  if (!(x > 0.0)) return 1.0;
  switch (kind_) {
    case WeightKind::exponential: return std::exp(-param_ * x);
    case WeightKind::shifted_exponential: return x <= 1.0 ? 1.0 : std::exp(-param_ * (x - 1.0));
    case WeightKind::power_exponential: return std::exp(-std::pow(x, 1.0 / param_));
    default: return 1.0 - cdf(x);
  }
}

double WeightDistribution::density(double x) const {
  if (x < 0.0) return 0.0;
  switch (kind_) {
    case WeightKind::exponential: return param_ * std::exp(-param_ * x);
    case WeightKind::shifted_exponential: return x < 1.0 ? 0.0 : param_ * std::exp(-param_ * (x - 1.0));
    case WeightKind::power_exponential: {
      const double p = 1.0 / param_;
      if (x == 0.0) return p < 1.0 ? kInf : (p == 1.0 ? 1.0 : 0.0);
      return p * std::pow(x, p - 1.0) * std::exp(-std::pow(x, p));
    }
    case WeightKind::uniform: return x < param_ ? 1.0 / param_ : 0.0;
    case WeightKind::user_table: {
      if (x < quantiles_.front() || x >= quantiles_.back()) return 0.0;
      const auto it = std::upper_bound(quantiles_.begin(), quantiles_.end(), x);
      const auto i = static_cast<std::size_t>(it - quantiles_.begin()) - 1;
      return (levels_[i + 1] - levels_[i]) / (quantiles_[i + 1] - quantiles_[i]);
    }
  }
  return 0.0;
}

double WeightDistribution::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile level must lie in (0, 1)");
  switch (kind_) {
    case WeightKind::exponential: return -std::log1p(-p) / param_;
    case WeightKind::shifted_exponential: return 1.0 - std::log1p(-p) / param_;
    case WeightKind::power_exponential: return std::pow(-std::log1p(-p), param_);
    case WeightKind::uniform: return p * param_;
    case WeightKind::user_table: {
      const auto it = std::upper_bound(levels_.begin(), levels_.end(), p);
      const auto i = static_cast<std::size_t>(it - levels_.begin()) - 1;
      const double frac = (p - levels_[i]) / (levels_[i + 1] - levels_[i]);
      return quantiles_[i] + frac * (quantiles_[i + 1] - quantiles_[i]);
    }
  }
  return 0.0;
}

double WeightDistribution::upper_quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("upper quantile level must lie in (0, 1)");
  switch (kind_) {
    case WeightKind::exponential: return -std::log(q) / param_;
    case WeightKind::shifted_exponential: return 1.0 - std::log(q) / param_;
    case WeightKind::power_exponential: return std::pow(-std::log(q), param_);
    default: return quantile(1.0 - q);
  }
}

WeightDistribution::Evaluation WeightDistribution::evaluate(double x) const {
  if (!(x >= 0.0)) throw InvalidArgument("weight laws are evaluated on [0, inf)");
  return {cdf(x), density(x)};
}

double WeightDistribution::support_lower() const noexcept {
  switch (kind_) {
    case WeightKind::shifted_exponential: return 1.0;
    case WeightKind::user_table: return quantiles_.front();
    default: return 0.0;
  }
}

double WeightDistribution::support_upper() const noexcept {
  switch (kind_) {
    case WeightKind::uniform: return param_;
    case WeightKind::user_table: return quantiles_.back();
    default: return kInf;
  }
}

double WeightDistribution::mean() const {
  return integrate_against_density(*this, [](double t) { return t; });
}

double WeightDistribution::second_moment() const {
  return integrate_against_density(*this, [](double t) { return t * t; });
}

double truncation_point(const WeightDistribution& dist, double decay) {
  const double upper = dist.support_upper();
  if (std::isfinite(upper)) return upper;
  double t = dist.upper_quantile(kTailSurvival);
  if (decay > 0.0) t = std::min(t, dist.support_lower() + kTailExponent / decay);
  return t;
}

double integrate_against_density(const WeightDistribution& dist,
                                 const std::function<double(double)>& h, double from,
                                 double decay, const QuadratureOptions& options) {
  const double lower = std::max(from, dist.support_lower());
  double upper = dist.support_upper();
  if (!std::isfinite(upper)) {
    upper = dist.upper_quantile(kTailSurvival);
    if (decay > 0.0) upper = std::min(upper, lower + kTailExponent / decay);
  }
  if (!(upper > lower)) return 0.0;
  return integrate_or_throw([&](double t) { return h(t) * dist.density(t); }, lower, upper,
                            dist.breakpoints(), options);
}

}  // namespace fpp
