#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fpp/degrees.hpp"
#include "fpp/errors.hpp"

using namespace fpp;

namespace {

std::vector<std::uint32_t> as_vector(const DegreeSequence& s) { return {s.degrees().begin(), s.degrees().end()}; }

}  // namespace

TEST_SUITE("degrees") {
  TEST_CASE("ceiling rule") {
    CHECK(as_vector(build_deterministic({{1, 0.5}, {2, 1.0}}, 4)) == std::vector<std::uint32_t>{1, 1, 2, 2});
    CHECK(as_vector(build_deterministic({{3, 1.0}}, 6)) == std::vector<std::uint32_t>(6, 3));
  }

  TEST_CASE("deterministic parity fix") {
    const DegreeSequence s = build_deterministic({{1, 0.5}, {3, 1.0}}, 3);
    CHECK(as_vector(s) == std::vector<std::uint32_t>{1, 1, 4});
    CHECK(s.parity_adjusted());
    CHECK_FALSE(build_deterministic({{1, 0.5}, {2, 1.0}}, 4).parity_adjusted());
  }

  TEST_CASE("ceiling rule snaps floating noise") {
    // n F(k) = 10 * 0.3 is 3.0000000000000004 in binary floating point.
    const DegreeSequence s = build_deterministic_from_pmf({{1, 0.1}, {2, 0.2}, {3, 0.7}}, 10);
    std::size_t ones = 0;
    std::size_t twos = 0;
    for (auto d : s.degrees()) {
      ones += d == 1;
      twos += d == 2;
    }
    CHECK(ones == 1);
    CHECK(twos == 2);
  }

  TEST_CASE("deterministic errors") {
    CHECK_THROWS_AS(build_deterministic({{3, 1.0}}, 1), InvalidArgument);
    CHECK_THROWS_AS(build_deterministic({{1, 0.7}, {2, 0.5}}, 10), InvalidArgument);
    CHECK_THROWS_AS(build_deterministic({{1, 0.5}, {2, 0.9}}, 10), InvalidArgument);
  }

  TEST_CASE("iid") {
    Rng rng(7);
    CHECK(as_vector(build_iid({{4, 1.0}}, 10, rng)) == std::vector<std::uint32_t>(10, 4));
    const DegreeSequence odd = build_iid({{1, 1.0}}, 3, rng);
    CHECK(as_vector(odd) == std::vector<std::uint32_t>{1, 1, 2});
    CHECK(odd.parity_adjusted());

    Rng rng1(1);
    const std::size_t n = 100'000;
    const DegreeSequence s = build_iid({{1, 0.5}, {2, 0.5}}, n, rng1);
    double ones = 0;
    for (auto d : s.degrees()) ones += d == 1;
    // Exact binomial sd is sqrt(n)/2; the tolerance 0.01 is 6.3 sd.
    CHECK(std::abs(ones / n - 0.5) < 0.01);

    Rng a(99);
    Rng b(99);
    CHECK(as_vector(build_iid({{1, 0.3}, {5, 0.7}}, 500, a)) == as_vector(build_iid({{1, 0.3}, {5, 0.7}}, 500, b)));
  }

  TEST_CASE("iid errors") {
    Rng rng(1);
    CHECK_THROWS_AS(build_iid({{0, 0.5}, {2, 0.5}}, 10, rng), InvalidArgument);
    CHECK_THROWS_AS(build_iid({{1, -0.5}, {2, 1.5}}, 10, rng), InvalidArgument);
    CHECK_THROWS_AS(build_iid({{1, 0.5}, {2, 0.49}}, 10, rng), InvalidArgument);
  }

  TEST_CASE("sequence invariants") {
    CHECK_THROWS_AS(DegreeSequence({3}), InvalidArgument);
    CHECK_THROWS_AS(DegreeSequence({1, 0, 1}), InvalidArgument);
    CHECK_THROWS_AS(DegreeSequence({1, 2}), InvalidArgument);
    CHECK(DegreeSequence({1, 3}).total_degree() == 4);
  }

  TEST_CASE("diagnostics") {
    const DegreeDiagnostics a = diagnostics(DegreeSequence({3, 3, 3, 3}), 10.0);
    CHECK(a.mu_n == 3.0);
    CHECK(a.nu_n == 2.0);
    CHECK(a.x2logx == 0.0);

    const DegreeDiagnostics b = diagnostics(DegreeSequence({1, 2, 3}), 1.0);
    CHECK(b.mu_n == 2.0);
    CHECK(b.nu_n == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(b.x2logx == doctest::Approx((4 * std::log(2.0) + 9 * std::log(3.0)) / 3).epsilon(1e-14));
    CHECK(b.second_moment == doctest::Approx(14.0 / 3.0));
    CHECK(b.max_degree == 3);

    const DegreeDiagnostics c = diagnostics(DegreeSequence({1, 1}));
    CHECK(c.nu_n == 0.0);
    CHECK_FALSE(c.supercritical());
    CHECK(c.cutoff == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("x2logx is non-increasing in the cutoff") {
    const DegreeSequence s({1, 2, 3, 5, 8, 13, 21, 1});
    double prev = diagnostics(s, 0.5).x2logx;
    for (double k = 0.75; k < 30; k *= 1.5) {
      const double v = diagnostics(s, k).x2logx;
      CHECK(v <= prev);
      CHECK(v >= 0.0);
      prev = v;
    }
  }

  TEST_CASE("regular nu is r - 1") {
    for (std::uint32_t r : {2u, 3u, 4u, 7u}) CHECK(diagnostics(build_regular(r, 100)).nu_n == r - 1.0);
  }

  TEST_CASE("size-biased law") {
    const DiscreteLaw a = size_biased_pmf(DegreeSequence({1, 2, 3}));
    CHECK(a[0] == doctest::Approx(1.0 / 6));
    CHECK(a[1] == doctest::Approx(2.0 / 6));
    CHECK(a[2] == doctest::Approx(3.0 / 6));

    const DiscreteLaw b = size_biased_pmf(build_regular(5, 10));
    CHECK(b[4] == 1.0);
    CHECK(b.size() == 5);

    const DiscreteLaw c = size_biased_pmf(DegreeSequence({1, 1, 1, 5}));
    CHECK(c[0] == doctest::Approx(3.0 / 8));
    CHECK(c[4] == doctest::Approx(5.0 / 8));
    CHECK(c[1] + c[2] + c[3] == 0.0);
  }

  TEST_CASE("size-biased mean equals nu_n") {
    Rng rng(3);
    const DegreeSequence s = build_iid({{1, 0.2}, {2, 0.3}, {4, 0.4}, {9, 0.1}}, 5000, rng);
    CHECK(size_biased_pmf(s).mean() == doctest::Approx(diagnostics(s).nu_n).epsilon(1e-12));
  }

  TEST_CASE("mean degree converges along n") {
    const std::map<int, double> pmf{{1, 0.25}, {2, 0.25}, {3, 0.25}, {6, 0.25}};
    for (std::size_t n : {100u, 10'000u}) {
      const DegreeDiagnostics d = diagnostics(build_deterministic_from_pmf(pmf, n));
      CHECK(std::abs(d.mu_n - 3.0) <= 2.0 * 6 / static_cast<double>(n));
    }
  }

  TEST_CASE("serialization round trip") {
    const DegreeSequence s({1, 4, 2, 2, 3});
    std::stringstream ss;
    s.write(ss);
    CHECK(as_vector(DegreeSequence::read(ss)) == as_vector(s));

    std::istringstream table("# degree probability\n1 0.5\n3 0.5\n");
    const auto pmf = read_degree_table(table);
    CHECK(pmf.at(1) == 0.5);
    CHECK(pmf.at(3) == 0.5);
  }
}
