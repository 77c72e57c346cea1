#include <cmath>
#include <vector>

#include <doctest.h>

#include "pesn/errors.hpp"
#include "pesn/rng.hpp"
#include "pesn/stats.hpp"

using namespace pesn;

TEST_SUITE("stats") {
  TEST_CASE("entropy of uniform occupancy") {
    for (int k = 1; k <= 8; ++k) {
      const int bins = 1 << k;
      HistogramSpec s{bins, 0.0, 1.0, 2.0};
      std::vector<double> v;
      for (int b = 0; b < bins; ++b)
        for (int r = 0; r < 3; ++r) v.push_back((b + 0.5) / bins);
      CHECK(shannon_entropy(v, s) == doctest::Approx(k).epsilon(1e-12));
    }
    const std::vector<double> one(100, 0.3);
    CHECK(shannon_entropy(one) == 0.0);
  }

  TEST_CASE("entropy of a sampled normal") {
    NormalGenerator g{RngStream(17)};
    std::vector<double> v(1'000'000);
    for (double& x : v) x = g.normal();
    const double h = shannon_entropy(v, {256, -4.0, 4.0, 2.0});
    CHECK(h == doctest::Approx(0.5 * std::log2(2.0 * M_PI * M_E) + 5.0).epsilon(0.05 / 7.0));
    double previous = h;
    for (int bins = 128; bins >= 2; bins /= 2) {
      const double coarse = shannon_entropy(v, {bins, -4.0, 4.0, 2.0});
      CHECK(coarse <= previous + 1e-12);
      previous = coarse;
    }
    CHECK(shannon_entropy(v, {256, -4.0, 4.0, std::exp(1.0)}) == doctest::Approx(h * std::log(2.0)));
  }

  TEST_CASE("histogram edges") {
    const std::vector<double> v{-5.0, -2.0, 1.999, 2.0, 7.0};
    const auto c = histogram(v, {4, -2.0, 2.0, 2.0});
    CHECK(c == std::vector<std::size_t>{2, 0, 0, 3});
    CHECK_THROWS_AS((void)histogram(std::vector<double>{NAN}, {}), DomainError);
    CHECK_THROWS_AS((void)shannon_entropy(std::vector<double>{}), DomainError);
    CHECK_THROWS_AS((void)histogram(v, {1, 0.0, 1.0, 2.0}), DomainError);
    CHECK_THROWS_AS((void)histogram(v, {4, 1.0, 1.0, 2.0}), DomainError);
  }

  TEST_CASE("linear fit") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{3, 5, 7, 9};
    const auto f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    const auto g = linear_fit(x, std::vector<double>{1, -1, 1, -1});
    CHECK(g.r2 < 0.5);
    CHECK_THROWS_AS((void)linear_fit(std::vector<double>{1, 1}, std::vector<double>{1, 2}), DomainError);
    CHECK_THROWS_AS((void)linear_fit(x, std::vector<double>{1}), DomainError);
  }

  TEST_CASE("median") {
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({4, 1, 3, 2}) == 2.5);
    CHECK(median({5}) == 5.0);
    CHECK_THROWS_AS((void)median({}), DomainError);
  }
}
