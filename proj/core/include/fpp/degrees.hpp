#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fpp/discrete.hpp"
#include "fpp/rng.hpp"

namespace fpp {

/// Prescribed vertex degrees d_1..d_n with even total.
class DegreeSequence {
 public:
  /// Validates: n >= 2, every degree >= 1, even total.
  explicit DegreeSequence(std::vector<std::uint32_t> degrees, bool parity_adjusted = false);

  std::size_t size() const noexcept { return degrees_.size(); }
  std::uint64_t total_degree() const noexcept { return total_; }
  std::uint32_t operator[](std::size_t i) const { return degrees_[i]; }
  std::span<const std::uint32_t> degrees() const noexcept { return degrees_; }
  std::uint32_t max_degree() const noexcept { return max_; }

  /// True when the last degree was incremented to make the total even.
  bool parity_adjusted() const noexcept { return parity_adjusted_; }

  /// Newline-delimited integers.
  void write(std::ostream& out) const;
  static DegreeSequence read(std::istream& in);

 private:
  std::vector<std::uint32_t> degrees_;
  std::uint64_t total_ = 0;
  std::uint32_t max_ = 0;
  bool parity_adjusted_ = false;
};

/// Empirical quantities of a degree sequence (finite-n regularity diagnostics).
struct DegreeDiagnostics {
  double mu_n = 0.0;           // E[D_n] = l_n / n
  double nu_n = 0.0;           // E[D_n (D_n - 1)] / E[D_n]
  double second_moment = 0.0;  // E[D_n^2]
  std::uint32_t max_degree = 0;
  double cutoff = 0.0;
  double x2logx = 0.0;         // E[D_n^2 log(D_n / cutoff)_+]

  bool supercritical() const noexcept { return nu_n > 1.0; }
};

/// n_k = ceil(n F(k)) - ceil(n F(k-1)) vertices of degree k, listed in
/// increasing degree. `cdf` maps degree -> F(degree) at the support points.
/// An odd total is fixed by incrementing the last vertex's degree.
DegreeSequence build_deterministic(const std::map<int, double>& cdf, std::size_t n);

/// Same rule, starting from a probability mass function.
DegreeSequence build_deterministic_from_pmf(const std::map<int, double>& pmf, std::size_t n);

/// i.i.d. draws from `pmf` (no mass at 0); d_n += 1 when the total is odd.
DegreeSequence build_iid(const std::map<int, double>& pmf, std::size_t n, Rng& rng);

/// r-regular sequence of length n (parity fix applies when r n is odd).
DegreeSequence build_regular(std::uint32_t r, std::size_t n);

/// `cutoff` defaults to sqrt(n).
DegreeDiagnostics diagnostics(const DegreeSequence& seq, std::optional<double> cutoff = {});

/// Law of D_n^* - 1: P(k) = (k + 1) #{i : d_i = k + 1} / l_n.
DiscreteLaw size_biased_pmf(const DegreeSequence& seq);

/// Law of D^* - 1 for a limiting degree law D.
DiscreteLaw size_biased_pmf(const DiscreteLaw& degree_law);

/// Two-column text (degree, value), comments after '#'.
std::map<int, double> read_degree_table(std::istream& in);

}  // namespace fpp
