#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fpp/rng.hpp"

namespace fpp {

/// A probability mass function on {0, 1, ..., size()-1}, sampled by inversion.
class DiscreteLaw {
 public:
  DiscreteLaw() = default;

  /// `probs[k]` is P(X = k). Requires non-negative entries summing to one
  /// within `tolerance`; the stored law is renormalised exactly.
  explicit DiscreteLaw(std::vector<double> probs, double tolerance = 1e-12);

  /// Law from a sparse map value -> probability (values must be >= 0).
  static DiscreteLaw from_map(const std::map<int, double>& pmf, double tolerance = 1e-12);

  /// Point mass at `value`.
  static DiscreteLaw point_mass(std::size_t value);

  std::size_t size() const noexcept { return pmf_.size(); }
  double operator[](std::size_t k) const { return k < pmf_.size() ? pmf_[k] : 0.0; }
  std::span<const double> pmf() const noexcept { return pmf_; }

  double mean() const;
  double second_moment() const;

  std::size_t sample(Rng& rng) const;

  std::string describe() const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

}  // namespace fpp
