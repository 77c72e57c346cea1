#include <cmath>
#include <vector>

#include <doctest.h>

#include "pesn/activation.hpp"
#include "pesn/errors.hpp"
#include "pesn/moments.hpp"
#include "pesn/spline.hpp"

using namespace pesn;

TEST_SUITE("spline") {
  TEST_CASE("mesh") {
    const Mesh m = Mesh::uniform(-10.0, 10.0, 101);
    CHECK(m.nodes.front() == -10.0);
    CHECK(m.nodes.back() == 10.0);
    CHECK(m.tau == doctest::Approx(0.2));
    for (std::size_t i = 0; i < m.nodes.size(); ++i) CHECK(m.nodes[i] == -m.nodes[m.nodes.size() - 1 - i]);
    CHECK(m.segment_of(-11.0) == 0);
    CHECK(m.segment_of(10.0) == 99);
    CHECK(m.segment_of(0.1) == 50);
    CHECK_THROWS((void)Mesh::uniform(1.0, 1.0, 10));
  }

  TEST_CASE("interpolates every node") {
    for (auto id : {ActivationId::tanh, ActivationId::sigmoid, ActivationId::swish, ActivationId::relu}) {
      const auto f = Activation::make(id);
      const SplineTable t = build_spline_table(f, -10.0, 10.0, 101, 4);
      for (double z : t.mesh.nodes) {
        for (int p = 1; p <= 4; ++p) {
          CHECK(t.eval(p, z) == doctest::Approx(std::pow(f(z), p)).epsilon(1e-13).scale(1.0));
        }
      }
      CHECK(t.coeffs[0].size() == 100);
    }
  }

  TEST_CASE("dense error within the interpolation bound") {
    const auto f = Activation::make(ActivationId::tanh);
    const SplineTable t = build_spline_table(f);
    const double bound = std::pow(t.mesh.tau, 4) / 16.0 * t.fourth_derivative_sup[0];
    double worst = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double z = -10.0 + 20.0 * i / 10000.0;
      worst = std::max(worst, std::abs(t.eval(1, z) - std::tanh(z)));
    }
    CHECK(worst <= bound);
    CHECK(t.fourth_derivative_sup[0] == doctest::Approx(4.0859).epsilon(1e-3));
  }

  TEST_CASE("clamped spline reproduces a cubic") {
    std::vector<double> x;
    std::vector<double> y;
    for (int i = 0; i <= 12; ++i) {
      x.push_back(-2.0 + 0.3 * i + 0.05 * (i % 3));
      y.push_back(x.back() * x.back() * x.back());
    }
    const auto s = fit_cubic_spline(x, y, SplineEnd::clamped, 3.0 * x.front() * x.front(),
                                    3.0 * x.back() * x.back());
    for (int i = 0; i <= 500; ++i) {
      const double z = x.front() + (x.back() - x.front()) * i / 500.0;
      CHECK(s(z) == doctest::Approx(z * z * z).epsilon(1e-12).scale(1.0));
    }
  }

  TEST_CASE("natural ends have zero curvature") {
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{0.0, 1.0, 0.0, -1.0, 2.0};
    const auto s = fit_cubic_spline(x, y);
    CHECK(std::abs(s.pieces.front()[2]) < 1e-14);
    const auto& last = s.pieces.back();
    CHECK(std::abs(2.0 * last[2] + 6.0 * last[3] * 1.0) < 1e-12);
  }

  TEST_CASE("text round trip is exact") {
    const SplineTable t = build_spline_table(Activation::make(ActivationId::swish), -8.0, 8.0, 41, 4);
    const std::string text = to_text(t);
    const SplineTable back = spline_table_from_text(text);
    CHECK(to_text(back) == text);
    CHECK(back.mesh.n_points == 41);
    for (double z : {-9.0, -3.3, 0.0, 1.7, 7.9}) CHECK(back.eval(2, z) == t.eval(2, z));
    CHECK_THROWS((void)spline_table_from_text("garbage"));
  }

  TEST_CASE("fourth derivative sup of a quartic") {
    const double sup = fourth_derivative_sup([](double z) { return z * z * z * z; }, -1.0, 1.0, 1001, 0.05);
    CHECK(sup == doctest::Approx(24.0).epsilon(1e-6));
  }
}
