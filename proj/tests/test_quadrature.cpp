#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fpp/discrete.hpp"
#include "fpp/errors.hpp"
#include "fpp/quadrature.hpp"
#include "fpp/rng.hpp"

using namespace fpp;

TEST_SUITE("quadrature") {
  TEST_CASE("smooth integrands") {
    CHECK(integrate_or_throw([](double x) { return std::sin(x); }, 0, std::numbers::pi) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK(integrate_or_throw([](double x) { return std::exp(-x * x); }, -8, 8) ==
          doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  }

  TEST_CASE("endpoint singularity") {
    const QuadratureResult r = integrate([](double x) { return 1 / std::sqrt(x); }, 0, 1);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(integrate_or_throw([](double x) { return std::log(x); }, 0, 1) == doctest::Approx(-1.0).epsilon(1e-10));
  }

  TEST_CASE("kink listed as breakpoint") {
    const std::vector<double> kink{0.3};
    const QuadratureResult r = integrate([](double x) { return std::abs(x - 0.3); }, 0, 1, kink);
    CHECK(r.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-14));
  }

  TEST_CASE("non-convergence is reported") {
    QuadratureOptions opt;
    opt.max_intervals = 3;
    const auto f = [](double x) { return std::sin(1 / x); };
    CHECK_FALSE(integrate(f, 1e-4, 1, {}, opt).converged);
    CHECK_THROWS_AS(integrate_or_throw(f, 1e-4, 1, {}, opt), NumericalError);
  }
}

TEST_SUITE("degrees") {
  TEST_CASE("discrete law") {
    const DiscreteLaw law({0.2, 0.0, 0.8});
    CHECK(law.mean() == doctest::Approx(1.6));
    CHECK(law.second_moment() == doctest::Approx(3.2));
    CHECK(law[7] == 0.0);
    CHECK_THROWS_AS(DiscreteLaw({0.5, 0.4}), InvalidArgument);
    CHECK_THROWS_AS(DiscreteLaw({-0.1, 1.1}), InvalidArgument);
    CHECK(DiscreteLaw::point_mass(3)[3] == 1.0);
    CHECK(DiscreteLaw::from_map({{2, 0.25}, {4, 0.75}})[4] == 0.75);

    Rng rng(5);
    std::vector<double> counts(3);
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i) counts[law.sample(rng)] += 1;
    CHECK(counts[1] == 0.0);
    // Binomial sd at p = 0.2 is 0.00126; tolerance is 4 sd.
    CHECK(std::abs(counts[0] / draws - 0.2) < 0.005);
  }

  TEST_CASE("rng streams") {
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
    Rng a(derive_seed(7, 3));
    Rng b(derive_seed(7, 3));
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(1);
    for (int i = 0; i < 10'000; ++i) {
      const double u = c.uniform();
      CHECK((u > 0 && u < 1));
      CHECK(c.below(7) < 7);
    }
  }
}
