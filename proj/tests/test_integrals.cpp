#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "pesn/errors.hpp"
#include "pesn/gaussian_integrals.hpp"
#include "pesn/rng.hpp"

using namespace pesn;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quadrature(int k, double lo, double hi, double mu, double var) {
  auto f = [=](double z) {
    return std::pow(z, k) * std::exp(-(z - mu) * (z - mu) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 12, 1e-13);
}

}  // namespace

TEST_SUITE("integrals") {
  TEST_CASE("full-line raw moments") {
    for (double mu : {-2.0, 0.0, 0.7, 3.0}) {
      for (double var : {0.05, 1.0, 4.0}) {
        CHECK(segment_integral(0, -kInf, kInf, mu, var) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(segment_integral(1, -kInf, kInf, mu, var) == doctest::Approx(mu).epsilon(1e-13));
        CHECK(segment_integral(2, -kInf, kInf, mu, var) == doctest::Approx(mu * mu + var).epsilon(1e-13));
        CHECK(segment_integral(3, -kInf, kInf, mu, var) ==
              doctest::Approx(mu * mu * mu + 3 * mu * var).epsilon(1e-12).scale(1.0));
        CHECK(gaussian_power_integral(4, -kInf, kInf, mu, var) ==
              doctest::Approx(std::pow(mu, 4) + 6 * mu * mu * var + 3 * var * var).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("finite interval against quadrature") {
    CHECK(std::abs(segment_integral(2, 0.0, 1.0, 0.3, 0.5) - quadrature(2, 0.0, 1.0, 0.3, 0.5)) < 1e-10);
    NormalGenerator g(RngStream(5));
    for (int i = 0; i < 200; ++i) {
      const int k = static_cast<int>(g.below(5));
      const double lo = -6.0 + 12.0 * g.uniform();
      const double hi = lo + 3.0 * g.uniform();
      const double mu = -4.0 + 8.0 * g.uniform();
      const double var = 0.01 + 3.0 * g.uniform();
      const double ref = quadrature(k, lo, hi, mu, var);
      const double got = k <= 3 ? segment_integral(k, lo, hi, mu, var) : gaussian_power_integral(k, lo, hi, mu, var);
      CHECK(std::abs(got - ref) < 1e-10);
      if (k <= 3) CHECK(std::abs(gaussian_power_integral(k, lo, hi, mu, var) - ref) < 1e-10);
    }
  }

  TEST_CASE("additivity") {
    for (int k = 0; k <= 3; ++k) {
      const double whole = segment_integral(k, -1.3, 2.1, 0.4, 0.8);
      const double parts = segment_integral(k, -1.3, 0.25, 0.4, 0.8) + segment_integral(k, 0.25, 2.1, 0.4, 0.8);
      CHECK(std::abs(whole - parts) < 1e-12);
    }
  }

  TEST_CASE("far tails do not cancel") {
    const double m = gaussian_mass(9.0, 10.0, 0.0, 1.0);
    const double ref = 0.5 * (std::erfc(9.0 / std::sqrt(2.0)) - std::erfc(10.0 / std::sqrt(2.0)));
    CHECK(m == doctest::Approx(ref).epsilon(1e-12));
    CHECK(erf_diff(-8.0, -7.0) > 0.0);
    CHECK(erf_diff(-8.0, -7.0) == doctest::Approx(std::erfc(7.0) - std::erfc(8.0)).epsilon(1e-12));
    CHECK(erf_diff(1.0, 1.0) == 0.0);
  }

  TEST_CASE("domain errors") {
    CHECK_THROWS_AS((void)segment_integral(1, 0.0, 1.0, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS((void)segment_integral(1, 0.0, 1.0, 0.0, -1.0), DomainError);
    CHECK_THROWS_AS((void)segment_integral(4, 0.0, 1.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS((void)segment_integral(1, 1.0, 0.0, 0.0, 1.0), DomainError);
  }
}
