#include "fpp/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fpp/errors.hpp"

namespace fpp {

DiscreteLaw::DiscreteLaw(std::vector<double> probs, double tolerance) : pmf_(std::move(probs)) {
  if (pmf_.empty()) throw InvalidArgument("empty probability mass function");
  double total = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InvalidArgument("probability mass function has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > tolerance) {
    std::ostringstream os;
    os << "probability mass function sums to " << total << ", expected 1";
    throw InvalidArgument(os.str());
  }
  while (pmf_.size() > 1 && pmf_.back() == 0.0) pmf_.pop_back();
  for (double& p : pmf_) p /= total;
  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

DiscreteLaw DiscreteLaw::from_map(const std::map<int, double>& pmf, double tolerance) {
  if (pmf.empty()) throw InvalidArgument("empty probability mass function");
  if (pmf.begin()->first < 0) throw InvalidArgument("probability mass function on negative values");
  std::vector<double> probs(static_cast<std::size_t>(pmf.rbegin()->first) + 1, 0.0);
  for (const auto& [k, p] : pmf) probs[static_cast<std::size_t>(k)] = p;
  return DiscreteLaw(std::move(probs), tolerance);
}

DiscreteLaw DiscreteLaw::point_mass(std::size_t value) {
  std::vector<double> probs(value + 1, 0.0);
  probs[value] = 1.0;
  return DiscreteLaw(std::move(probs));
}

double DiscreteLaw::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) m += static_cast<double>(k) * pmf_[k];
  return m;
}

double DiscreteLaw::second_moment() const {
  double m = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    const auto x = static_cast<double>(k);
    m += x * x * pmf_[k];
  }
  return m;
}

std::size_t DiscreteLaw::sample(Rng& rng) const {
  if (pmf_.size() == 1) return 0;
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto k = static_cast<std::size_t>(it - cdf_.begin());
  return std::min(k, pmf_.size() - 1);
}

std::string DiscreteLaw::describe() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    if (pmf_[k] == 0.0) continue;
    if (!first) os << ',';
    os << k << '=' << pmf_[k];
    first = false;
  }
  return os.str();
}

}  // namespace fpp
