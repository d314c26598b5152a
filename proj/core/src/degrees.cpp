#include "fpp/degrees.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fpp/errors.hpp"

namespace fpp {
namespace {

// ceil(x), except that values within floating noise of an integer snap to it
// (0.3 * 10 must count as 3, not 4).
std::int64_t ceil_snapped(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

void check_pmf(const std::map<int, double>& pmf) {
  if (pmf.empty()) throw InvalidArgument("empty degree distribution");
  double total = 0.0;
  for (const auto& [k, p] : pmf) {
    if (p < 0.0 || !std::isfinite(p)) throw InvalidArgument("degree distribution has a negative entry");
    if (k <= 0 && p > 0.0) throw InvalidArgument("degree distribution puts mass on degree 0 or below");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "degree distribution sums to " << total << ", expected 1 within 1e-12";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

DegreeSequence::DegreeSequence(std::vector<std::uint32_t> degrees, bool parity_adjusted)
    : degrees_(std::move(degrees)), parity_adjusted_(parity_adjusted) {
  if (degrees_.size() < 2) throw InvalidArgument("a degree sequence needs at least two vertices");
  for (std::uint32_t d : degrees_) {
    if (d == 0) throw InvalidArgument("degree-0 vertices are not allowed");
    total_ += d;
    max_ = std::max(max_, d);
  }
  if (total_ % 2 != 0) throw InvalidArgument("total degree must be even");
}

void DegreeSequence::write(std::ostream& out) const {
  for (std::uint32_t d : degrees_) out << d << '\n';
}

DegreeSequence DegreeSequence::read(std::istream& in) {
  std::vector<std::uint32_t> degrees;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    long long d = 0;
    if (!(row >> d) || d < 0) {
      throw InvalidArgument("degree file line " + std::to_string(lineno) + ": expected a non-negative integer");
    }
    degrees.push_back(static_cast<std::uint32_t>(d));
  }
  return DegreeSequence(std::move(degrees));
}

DegreeSequence build_deterministic(const std::map<int, double>& cdf, std::size_t n) {
  if (n < 2) throw InvalidArgument("a degree sequence needs at least two vertices");
  if (cdf.empty()) throw InvalidArgument("empty degree CDF");
  double prev = 0.0;
  for (const auto& [k, f] : cdf) {
    if (!(f >= prev) || f > 1.0 + 1e-12) throw InvalidArgument("degree CDF is not monotone in [0, 1]");
    if (k <= 0 && f > 0.0) throw InvalidArgument("degree CDF puts mass on degree 0 or below");
    prev = f;
  }
  if (std::abs(prev - 1.0) > 1e-12) throw InvalidArgument("degree CDF does not reach 1");

  std::vector<std::uint32_t> degrees;
  degrees.reserve(n);
  std::int64_t placed_before = 0;
  for (const auto& [k, f] : cdf) {
    if (k <= 0) continue;
    const std::int64_t upto = ceil_snapped(static_cast<double>(n) * std::min(f, 1.0));
    for (std::int64_t i = placed_before; i < upto; ++i) degrees.push_back(static_cast<std::uint32_t>(k));
    placed_before = std::max(placed_before, upto);
  }
  bool adjusted = false;
  std::uint64_t total = 0;
  for (std::uint32_t d : degrees) total += d;
  if (total % 2 != 0) {
    degrees.back() += 1;
    adjusted = true;
  }
  return DegreeSequence(std::move(degrees), adjusted);
}

DegreeSequence build_deterministic_from_pmf(const std::map<int, double>& pmf, std::size_t n) {
  check_pmf(pmf);
  std::map<int, double> cdf;
  double acc = 0.0;
  for (const auto& [k, p] : pmf) {
    acc += p;
    cdf[k] = acc;
  }
  cdf.rbegin()->second = 1.0;
  return build_deterministic(cdf, n);
}

DegreeSequence build_iid(const std::map<int, double>& pmf, std::size_t n, Rng& rng) {
  if (n < 2) throw InvalidArgument("a degree sequence needs at least two vertices");
  check_pmf(pmf);
  const DiscreteLaw law = DiscreteLaw::from_map(pmf);
  std::vector<std::uint32_t> degrees(n);
  std::uint64_t total = 0;
  for (auto& d : degrees) {
    d = static_cast<std::uint32_t>(law.sample(rng));
    total += d;
  }
  bool adjusted = false;
  if (total % 2 != 0) {
    degrees.back() += 1;
    adjusted = true;
  }
  return DegreeSequence(std::move(degrees), adjusted);
}

DegreeSequence build_regular(std::uint32_t r, std::size_t n) {
  if (r == 0) throw InvalidArgument("regular degree must be positive");
  return build_deterministic({{static_cast<int>(r), 1.0}}, n);
}

DegreeDiagnostics diagnostics(const DegreeSequence& seq, std::optional<double> cutoff) {
  DegreeDiagnostics out;
  const auto n = static_cast<double>(seq.size());
  out.cutoff = cutoff.value_or(std::sqrt(n));
  if (!(out.cutoff > 0.0)) throw InvalidArgument("x2logx cutoff must be positive");
  double sum_sq = 0.0;
  double sum_falling = 0.0;
  double x2logx = 0.0;
  for (std::uint32_t d : seq.degrees()) {
    const auto x = static_cast<double>(d);
    sum_sq += x * x;
    sum_falling += x * (x - 1.0);
    const double ratio = x / out.cutoff;
    if (ratio > 1.0) x2logx += x * x * std::log(ratio);
  }
  const auto total = static_cast<double>(seq.total_degree());
  out.mu_n = total / n;
  out.nu_n = sum_falling / total;
  out.second_moment = sum_sq / n;
  out.max_degree = seq.max_degree();
  out.x2logx = x2logx / n;
  return out;
}

DiscreteLaw size_biased_pmf(const DegreeSequence& seq) {
  std::vector<std::uint64_t> counts(seq.max_degree() + 1, 0);
  for (std::uint32_t d : seq.degrees()) ++counts[d];
  std::vector<double> probs(seq.max_degree(), 0.0);
  const auto total = static_cast<double>(seq.total_degree());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    probs[k] = static_cast<double>((k + 1) * counts[k + 1]) / total;
  }
  return DiscreteLaw(std::move(probs));
}

DiscreteLaw size_biased_pmf(const DiscreteLaw& degree_law) {
  const double mean = degree_law.mean();
  if (!(mean > 0.0)) throw InvalidArgument("degree law has zero mean");
  if (degree_law.size() < 2) throw InvalidArgument("degree law has no mass above 0");
  std::vector<double> probs(degree_law.size() - 1, 0.0);
  for (std::size_t k = 0; k < probs.size(); ++k) {
    probs[k] = static_cast<double>(k + 1) * degree_law[k + 1] / mean;
  }
  return DiscreteLaw(std::move(probs), 1e-9);
}

std::map<int, double> read_degree_table(std::istream& in) {
  std::map<int, double> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    long long k = 0;
    double v = 0.0;
    if (!(row >> k)) continue;
    if (!(row >> v)) {
      throw InvalidArgument("degree table line " + std::to_string(lineno) + ": expected two columns");
    }
    if (!table.emplace(static_cast<int>(k), v).second) {
      throw InvalidArgument("degree table line " + std::to_string(lineno) + ": duplicate degree");
    }
  }
  return table;
}

}  // namespace fpp
