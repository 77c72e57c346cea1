#include <cmath>
#include <memory>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "pesn/errors.hpp"
#include "pesn/moments.hpp"
#include "pesn/spline.hpp"

using namespace pesn;

namespace {

const Activation kTanh = Activation::make(ActivationId::tanh);

const SplineTable& tanh_table() {
  static const SplineTable t = build_spline_table(kTanh, -10.0, 10.0, 101, 4);
  return t;
}

// E f(z)^p for z ~ N(mu, var) by adaptive quadrature over mu +- 12 sd.
double expect(const Activation& f, int p, double mu, double var) {
  const double sd = std::sqrt(var);
  auto g = [&](double z) {
    return std::pow(f(z), p) * std::exp(-(z - mu) * (z - mu) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, mu - 12.0 * sd, mu + 12.0 * sd, 12, 1e-13);
}

}  // namespace

TEST_SUITE("moments") {
  TEST_CASE("analytic mean") {
    for (double v : {0.0, 0.1, 1.0, 5.0}) CHECK(analytic_tanh_mean(0.0, v) == 0.0);
    for (double m : {-3.0, -0.4, 0.0, 1.2, 6.0}) CHECK(analytic_tanh_mean(m, 0.0) == doctest::Approx(std::tanh(m)).epsilon(1e-14));
    const auto mc = mc_moments_detailed(kTanh, 3.0, 0.2, 10'000'000, RngStream(31));
    const double err = std::abs(analytic_tanh_mean(3.0, 0.2) - mc.moments.mean);
    MESSAGE("analytic mean error at (3, 0.2): " << err << " (MC se " << mc.mean_se << ")");
    CHECK(std::isfinite(err));
    CHECK(err < 1e-2);
    CHECK_THROWS_AS((void)analytic_tanh_mean(0.0, -1.0), DomainError);
  }

  TEST_CASE("analytic variance") {
    CHECK(analytic_tanh_variance(0.0, 0.0) == 0.0);
    CHECK(analytic_tanh_variance(8.0, 0.01) <= 1e-3);
    CHECK(analytic_tanh_variance(-8.0, 0.01) <= 1e-3);
    CHECK(analytic_tanh_variance(0.5, 1.0) >= 0.0);
    const auto mc = mc_moments_detailed(kTanh, 0.0, 1.0, 10'000'000, RngStream(32));
    const double diff = analytic_tanh_variance(0.0, 1.0) - mc.moments.variance;
    MESSAGE("analytic variance minus MC at (0, 1): " << diff << " (MC se " << mc.variance_se << ")");
    CHECK(std::isfinite(diff));
    CHECK_THROWS_AS((void)analytic_tanh_variance(0.0, -0.1), DomainError);
  }

  TEST_CASE("spline mean is odd and matches the truth within the bound") {
    const auto& t = tanh_table();
    for (double v : {0.05, 0.2, 1.0}) {
      const auto m = spline_moments(t, 0.0, v, 4);
      const double eps = *mean_error_bound(t, 0.0, v);
      CHECK(std::abs(m.mean) <= eps);
      CHECK(std::abs(*m.skewness) <= 1e-8);
    }
    for (double mu : {0.3, 1.7, 4.2}) {
      for (double v : {0.01, 0.5, 2.0}) {
        CHECK(std::abs(spline_moments(t, -mu, v).mean + spline_moments(t, mu, v).mean) < 1e-12);
      }
    }
  }

  TEST_CASE("spline against quadrature and MC") {
    const auto& t = tanh_table();
    for (double mu = -5.0; mu <= 5.0; mu += 1.25) {
      for (double v : {0.01, 0.2, 1.0, 2.0}) {
        const auto m = spline_moments(t, mu, v);
        const double e1 = expect(kTanh, 1, mu, v);
        const double e2 = expect(kTanh, 2, mu, v);
        CHECK(std::abs(m.mean - e1) <= *mean_error_bound(t, mu, v));
        CHECK(std::abs(m.variance - (e2 - e1 * e1)) <= *variance_error_bound(t, mu, v));
        CHECK(m.variance >= 0.0);
        CHECK(m.variance_deficit <= *variance_error_bound(t, mu, v));
      }
    }
    const auto mc = mc_moments_detailed(kTanh, 3.0, 0.2, 10'000'000, RngStream(33));
    const auto m = spline_moments(t, 3.0, 0.2);
    CHECK(std::abs(m.mean - mc.moments.mean) <= 4.21321e-5 + 3.0 * mc.mean_se);
    CHECK(std::abs(m.mean - mc.moments.mean) <= *mean_error_bound(t, 3.0, 0.2) + 3.0 * mc.mean_se);
    const auto mc0 = mc_moments_detailed(kTanh, 0.0, 0.2, 10'000'000, RngStream(34));
    const auto m0 = spline_moments(t, 0.0, 0.2);
    CHECK(std::abs(m0.variance - mc0.moments.variance) <= *variance_error_bound(t, 0.0, 0.2) + 3.0 * mc0.variance_se);
  }

  TEST_CASE("saturated cells are nearly exact") {
    const auto& t = tanh_table();
    for (double mu : {-5.0, 5.0}) {
      for (double v : {0.2, 1.0}) {
        const auto m = spline_moments(t, mu, v);
        const double e1 = expect(kTanh, 1, mu, v);
        const double e2 = expect(kTanh, 2, mu, v);
        CHECK(std::abs(m.mean - e1) < 1e-6);
        CHECK(std::abs(m.variance - (e2 - e1 * e1)) < 1e-6);
      }
    }
  }

  TEST_CASE("fast path equals the reference path") {
    for (auto id : {ActivationId::tanh, ActivationId::sigmoid, ActivationId::swish, ActivationId::relu}) {
      const SplineTable t = build_spline_table(Activation::make(id), -8.0, 8.0, 81, 4);
      for (double mu : {-9.0, -2.5, 0.0, 0.3, 4.0, 12.0}) {
        for (double v : {1e-4, 0.3, 2.0, 30.0}) {
          const auto a = spline_moments(t, mu, v, 4);
          const auto b = spline_moments_reference(t, mu, v, 4);
          CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12).scale(1.0));
          CHECK(a.variance == doctest::Approx(b.variance).epsilon(1e-10).scale(1.0));
        }
      }
    }
  }

  TEST_CASE("point mass short circuit") {
    const auto m = spline_moments(tanh_table(), 0.7, 0.0, 4);
    CHECK(m.mean == doctest::Approx(std::tanh(0.7)).epsilon(1e-15));
    CHECK(m.variance == 0.0);
    CHECK(*m.skewness == 0.0);
    CHECK(*m.kurtosis == 3.0);
    CHECK_THROWS_AS((void)spline_moments(tanh_table(), 0.0, -1.0), DomainError);
    const SplineTable t2 = build_spline_table(kTanh);
    CHECK_THROWS_AS((void)spline_moments(t2, 0.0, 1.0, 4), DomainError);
  }

  TEST_CASE("higher moments track quadrature") {
    const auto& t = tanh_table();
    for (double mu : {-1.0, 0.5, 2.0}) {
      const double v = 0.5;
      const auto m = spline_moments(t, mu, v, 4);
      double e[5];
      for (int p = 1; p <= 4; ++p) e[p] = expect(kTanh, p, mu, v);
      const double var = e[2] - e[1] * e[1];
      const double m3 = e[3] - 3 * e[1] * e[2] + 2 * std::pow(e[1], 3);
      const double m4 = e[4] - 4 * e[1] * e[3] + 6 * e[1] * e[1] * e[2] - 3 * std::pow(e[1], 4);
      CHECK(*m.skewness == doctest::Approx(m3 / std::pow(var, 1.5)).epsilon(1e-3).scale(1.0));
      CHECK(*m.kurtosis == doctest::Approx(m4 / (var * var)).epsilon(1e-3));
    }
  }

  TEST_CASE("sigmoid symmetry and variance") {
    const auto sig = Activation::make(ActivationId::sigmoid);
    const SplineTable t = build_spline_table(sig);
    const auto m = spline_moments(t, 0.0, 1.0);
    CHECK(m.mean == doctest::Approx(0.5).epsilon(1e-12));
    const auto mc = mc_moments_detailed(sig, 0.0, 1.0, 10'000'000, RngStream(35));
    CHECK(std::abs(m.variance - mc.moments.variance) <= *variance_error_bound(t, 0.0, 1.0) + 3.0 * mc.variance_se);
  }

  TEST_CASE("bound structure") {
    const SplineTable coarse = build_spline_table(kTanh, -10.0, 10.0, 101);
    const SplineTable fine = build_spline_table(kTanh, -10.0, 10.0, 201);
    // interior term only: tails are ~1e-23 at mu = 0, var = 1
    const double ratio = *mean_error_bound(fine, 0.0, 1.0) / *mean_error_bound(coarse, 0.0, 1.0);
    CHECK(ratio == doctest::Approx(1.0 / 16.0).epsilon(2e-3));

    for (double mu : {-6.0, 0.0, 3.0, 9.5}) {
      for (double v : {0.05, 1.0, 10.0}) {
        CHECK(*mean_error_bound(fine, mu, v) <= *mean_error_bound(coarse, mu, v));
        CHECK(*variance_error_bound(coarse, mu, v) >= 2.0 * *mean_error_bound(coarse, mu, v));
      }
    }

    // same tau, wider interval: the tail part shrinks
    const SplineTable wide = build_spline_table(kTanh, -12.0, 12.0, 121);
    auto interior = [](const SplineTable& t, double mu, double v) {
      const double s = std::sqrt(2.0 * v);
      return std::pow(t.mesh.tau, 4) * t.fourth_derivative_sup[0] / 32.0 *
             (std::erf((t.mesh.b - mu) / s) - std::erf((t.mesh.a - mu) / s));
    };
    for (double mu : {-8.0, 0.0, 9.0}) {
      const double v = 4.0;
      const double tail_narrow = *mean_error_bound(coarse, mu, v) - interior(coarse, mu, v);
      const double tail_wide = *mean_error_bound(wide, mu, v) - interior(wide, mu, v);
      CHECK(tail_wide <= tail_narrow + 1e-15);
    }

    const SplineTable very_fine = build_spline_table(kTanh, -10.0, 10.0, 4001);
    CHECK(*variance_error_bound(very_fine, 0.0, 1.0) < 1e-9);

    CHECK_THROWS_AS((void)mean_error_bound(coarse, 0.0, 0.0), DomainError);
    const SplineTable relu = build_spline_table(Activation::make(ActivationId::relu));
    CHECK_FALSE(mean_error_bound(relu, 0.0, 1.0).has_value());
    CHECK_FALSE(variance_error_bound(relu, 0.0, 1.0).has_value());
  }

  TEST_CASE("swish variance bound covers the truth") {
    const auto swish = Activation::make(ActivationId::swish);
    const SplineTable t = build_spline_table(swish);
    for (double mu : {-3.0, 0.0, 2.0, 6.0}) {
      const double v = 1.0;
      const auto m = spline_moments(t, mu, v);
      const double e1 = expect(swish, 1, mu, v);
      const double e2 = expect(swish, 2, mu, v);
      CHECK(std::abs(m.mean - e1) <= *mean_error_bound(t, mu, v));
      CHECK(std::abs(m.variance - (e2 - e1 * e1)) <= *variance_error_bound(t, mu, v));
    }
  }

  TEST_CASE("relu through the spline machinery") {
    const auto relu = Activation::make(ActivationId::relu);
    const SplineTable t = build_spline_table(relu, -10.0, 10.0, 101, 4);
    for (double mu : {-1.0, 0.0, 2.0}) {
      const auto m = spline_moments(t, mu, 1.0);
      // the kink is only resolved to within a segment
      CHECK(std::abs(m.mean - expect(relu, 1, mu, 1.0)) < 0.1 * t.mesh.tau);
    }
  }

  TEST_CASE("monte carlo") {
    const auto pm = mc_moments(kTanh, 0.4, 0.0, 100, RngStream(1));
    CHECK(pm.mean == std::tanh(0.4));
    CHECK(pm.variance == 0.0);
    CHECK(std::abs(mc_moments(kTanh, -8.0, 0.01, 10000, RngStream(2)).mean + 1.0) < 1e-3);
    const auto a = mc_moments(kTanh, 0.3, 0.7, 5000, RngStream(3));
    const auto b = mc_moments(kTanh, 0.3, 0.7, 5000, RngStream(3));
    CHECK(a.mean == b.mean);
    CHECK(a.variance == b.variance);
    // fast path and chunked path agree on one chunk
    const auto d = mc_moments_detailed(kTanh, 0.3, 0.7, 5000, RngStream(3));
    CHECK(d.moments.mean == doctest::Approx(a.mean).epsilon(1e-13));
    CHECK(d.moments.variance == doctest::Approx(a.variance).epsilon(1e-11));
    const auto h = mc_moments_detailed(kTanh, 0.3, 0.7, 200'000, RngStream(4), 4);
    CHECK(h.moments.skewness.has_value());
    CHECK(std::abs(h.moments.mean - expect(kTanh, 1, 0.3, 0.7)) < 5.0 * h.mean_se);
    CHECK_THROWS_AS((void)mc_moments(kTanh, 0.0, 1.0, 1, RngStream(1)), DomainError);
  }

  TEST_CASE("dispatch") {
    const auto a = moments(Engine::analytic, kTanh, 0.0, 1.0);
    CHECK(a.mean == 0.0);
    CHECK(a.variance == analytic_tanh_variance(0.0, 1.0));
    CHECK_THROWS_AS((void)moments(Engine::analytic, Activation::make(ActivationId::sigmoid), 0.0, 1.0),
                    UnsupportedError);
    CHECK(parse_engine("spline") == Engine::spline);
    CHECK(engine_name(Engine::mc) == "mc");
    CHECK_THROWS_AS((void)parse_engine("exact"), ConfigError);

    EngineOptions opt;
    opt.table = std::make_shared<const SplineTable>(tanh_table());
    for (double mu : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      for (double v : {0.2, 1.0}) {
        const auto s = moments(Engine::spline, kTanh, mu, v, opt);
        const auto mc = mc_moments_detailed(kTanh, mu, v, 1'000'000, RngStream(40));
        CHECK(std::abs(s.mean - mc.moments.mean) <= *mean_error_bound(tanh_table(), mu, v) + 3.0 * mc.mean_se);
        CHECK(std::abs(s.variance - mc.moments.variance) <=
              *variance_error_bound(tanh_table(), mu, v) + 3.0 * mc.variance_se);
      }
    }
    EngineOptions wrong;
    wrong.table = std::make_shared<const SplineTable>(build_spline_table(Activation::make(ActivationId::sigmoid)));
    CHECK_THROWS_AS((void)moments(Engine::spline, kTanh, 0.0, 1.0, wrong), DomainError);
  }

  TEST_CASE("moment engine objects") {
    const auto table = std::make_shared<const SplineTable>(tanh_table());
    const auto s = MomentEngine::spline(table);
    CHECK(s.kind() == Engine::spline);
    CHECK(s(1.0, 0.5).mean == spline_moments(*table, 1.0, 0.5).mean);
    const auto mc = MomentEngine::monte_carlo(kTanh, 1000, RngStream(5));
    CHECK(mc(0.2, 0.3, 7).mean == mc(0.2, 0.3, 7).mean);
    CHECK(mc(0.2, 0.3, 7).mean != mc(0.2, 0.3, 8).mean);
    CHECK_THROWS_AS((void)MomentEngine::spline(nullptr), DomainError);
    CHECK_THROWS_AS((void)MomentEngine::analytic(Activation::make(ActivationId::swish)), UnsupportedError);
  }
}
