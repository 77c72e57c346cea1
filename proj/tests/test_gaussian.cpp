#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "pesn/errors.hpp"
#include "pesn/gaussian.hpp"
#include "pesn/rng.hpp"

using namespace pesn;

TEST_SUITE("gaussian") {
  TEST_CASE("linear_transform identity and zero maps") {
    const DiagonalGaussian x(Eigen::Vector3d(1.0, -2.0, 0.5), Eigen::Vector3d(0.3, 0.0, 2.0));
    const auto id = linear_transform(x, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
    CHECK(id.mean() == x.mean());
    CHECK(id.variance() == x.variance());

    const Eigen::Vector2d bias(4.0, -1.0);
    const auto zero = linear_transform(x, Eigen::MatrixXd::Zero(2, 3), bias);
    CHECK(zero.mean() == bias);
    CHECK(zero.variance().isZero(0.0));
  }

  TEST_CASE("linear_transform scaling matches sampling") {
    const DiagonalGaussian x(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0));
    Eigen::MatrixXd w(1, 1);
    w << 2.0;
    const auto y = linear_transform(x, w, Eigen::VectorXd::Zero(1));
    CHECK(y.mean()[0] == 2.0);
    CHECK(y.variance()[0] == 4.0);

    const std::size_t n = 1'000'000;
    const Eigen::MatrixXd s = sample(x, n, RngStream(42));
    const Eigen::ArrayXd t = 2.0 * s.col(0).array();
    const double mean = t.mean();
    const double var = (t - mean).square().sum() / (n - 1.0);
    const double se_mean = std::sqrt(4.0 / n);
    const double se_var = 4.0 * std::sqrt(2.0 / (n - 1.0));
    CHECK(std::abs(mean - 2.0) < 3.0 * se_mean);
    CHECK(std::abs(var - 4.0) < 3.0 * se_var);
  }

  TEST_CASE("linear_transform composes on means and on selector variances") {
    const DiagonalGaussian x(Eigen::Vector3d(0.2, 1.0, -3.0), Eigen::Vector3d(1.0, 0.5, 2.0));
    Eigen::MatrixXd w1(3, 3);
    w1 << 0.0, 2.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 3.0;
    Eigen::MatrixXd w2(2, 3);
    w2 << 1.0, 2.0, -1.0, 0.5, 0.0, 4.0;
    const Eigen::Vector3d b1(0.1, 0.2, 0.3);
    const Eigen::Vector2d b2(-1.0, 1.0);
    const auto two = linear_transform(linear_transform(x, w1, b1), w2, b2);
    const auto one = linear_transform(x, w2 * w1, w2 * b1 + b2);
    CHECK((two.mean() - one.mean()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((two.variance() - one.variance()).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("linear_transform rejects mismatched shapes") {
    const auto x = DiagonalGaussian::isotropic(Eigen::Vector2d(0.0, 0.0), 1.0);
    CHECK_THROWS_AS((void)linear_transform(x, Eigen::MatrixXd::Ones(2, 3), Eigen::Vector2d::Zero()), ShapeError);
    CHECK_THROWS_AS((void)linear_transform(x, Eigen::MatrixXd::Ones(2, 2), Eigen::Vector3d::Zero()), ShapeError);
  }

  TEST_CASE("diagonal gaussian invariants") {
    CHECK_THROWS_AS(DiagonalGaussian(Eigen::Vector2d(0, 0), Eigen::Vector3d(1, 1, 1)), ShapeError);
    CHECK_THROWS_AS(DiagonalGaussian(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, -1)), DomainError);
    CHECK_THROWS_AS(DiagonalGaussian(Eigen::Vector2d(0, NAN), Eigen::Vector2d(1, 1)), DomainError);
    const auto s = DiagonalGaussian::stack(DiagonalGaussian::point_mass(Eigen::Vector2d(1, 2)),
                                           DiagonalGaussian::isotropic(Eigen::VectorXd::Constant(1, 3.0), 0.5));
    CHECK(s.size() == 3);
    CHECK(s[2].mean == 3.0);
    CHECK(s[2].variance == 0.5);
    CHECK(s[0].variance == 0.0);
  }

  TEST_CASE("gaussian_product") {
    const auto p = gaussian_product({0.0, 1.0}, {0.0, 1.0});
    CHECK(p.product.mean == 0.0);
    CHECK(p.product.variance == doctest::Approx(0.5).epsilon(1e-15));

    const auto q = gaussian_product({1.7, 0.3}, {1.7, 5.0});
    CHECK(q.product.mean == doctest::Approx(1.7).epsilon(1e-15));

    namespace quad = boost::math::quadrature;
    auto pdf = [](double x, double m, double v) {
      return std::exp(-(x - m) * (x - m) / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
    };
    const double ref = quad::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return pdf(x, 0.0, 1.0) * pdf(x, 0.0, 1.0); }, -10.0, 10.0, 15, 1e-14);
    CHECK(p.scale == doctest::Approx(ref).epsilon(1e-12));
    CHECK(p.scale == doctest::Approx(0.5 / std::sqrt(std::numbers::pi)).epsilon(1e-12));

    const Gaussian1D a{-0.4, 0.7};
    const Gaussian1D b{1.3, 2.2};
    const double ref2 = quad::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return pdf(x, a.mean, a.variance) * pdf(x, b.mean, b.variance); }, -30.0, 30.0, 15,
        1e-14);
    const auto ab = gaussian_product(a, b);
    const auto ba = gaussian_product(b, a);
    CHECK(ab.scale == doctest::Approx(ref2).epsilon(1e-12));
    CHECK(ab.scale == ba.scale);
    CHECK(ab.product.mean == doctest::Approx(ba.product.mean).epsilon(1e-15));
    CHECK(ab.product.variance == ba.product.variance);

    CHECK_THROWS_AS((void)gaussian_product({0.0, 0.0}, {0.0, 1.0}), DomainError);
    CHECK_THROWS_AS((void)gaussian_product({0.0, 1.0}, {0.0, -1.0}), DomainError);
  }

  TEST_CASE("sample") {
    const DiagonalGaussian pm = DiagonalGaussian::point_mass(Eigen::Vector3d(1.0, -2.0, 3.0));
    const Eigen::MatrixXd s = sample(pm, 50, RngStream(1));
    for (Eigen::Index i = 0; i < s.rows(); ++i) CHECK(s.row(i).transpose() == pm.mean());

    const auto x = DiagonalGaussian::isotropic(Eigen::Vector2d(0.5, -1.0), 2.0);
    CHECK(sample(x, 100, RngStream(9)) == sample(x, 100, RngStream(9)));
    CHECK(sample(x, 100, RngStream(9)) != sample(x, 100, RngStream(10)));

    const std::size_t n = 1'000'000;
    const auto std1 = DiagonalGaussian::isotropic(Eigen::VectorXd::Zero(1), 1.0);
    const Eigen::ArrayXd z = sample(std1, n, RngStream(3)).col(0).array();
    const double mean = z.mean();
    const double var = (z - mean).square().sum() / (n - 1.0);
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 0.01);
  }

  TEST_CASE("empirical moments within five standard errors") {
    const DiagonalGaussian x(Eigen::Vector3d(-2.0, 0.0, 7.5), Eigen::Vector3d(0.01, 1.0, 9.0));
    const std::size_t n = 200'000;
    const Eigen::MatrixXd s = sample(x, n, RngStream(77));
    for (Eigen::Index j = 0; j < 3; ++j) {
      const Eigen::ArrayXd c = s.col(j).array();
      const double mean = c.mean();
      const double var = (c - mean).square().sum() / (n - 1.0);
      CHECK(std::abs(mean - x.mean()[j]) < 5.0 * std::sqrt(x.variance()[j] / n));
      CHECK(std::abs(var - x.variance()[j]) < 5.0 * x.variance()[j] * std::sqrt(2.0 / n));
    }
  }

  TEST_CASE("rng streams") {
    const RngStream r(123);
    CHECK(r.child(0) != r.child(1));
    CHECK(r.child(1).child(0) != r.child(0).child(1));
    CHECK(r.child(5) == RngStream(123).child(5));

    NormalGenerator a(r.child(2));
    NormalGenerator b(r.child(2));
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

    NormalGenerator g(r);
    std::size_t counts[7] = {};
    for (int i = 0; i < 70000; ++i) {
      const auto k = g.below(7);
      REQUIRE(k < 7);
      ++counts[k];
    }
    for (auto c : counts) CHECK(std::abs(double(c) - 10000.0) < 5.0 * std::sqrt(10000.0 * 6.0 / 7.0));

    NormalGenerator u(RngStream(8));
    for (int i = 0; i < 10000; ++i) {
      const double v = u.uniform();
      REQUIRE(v > 0.0);
      REQUIRE(v < 1.0);
    }
  }

  TEST_CASE("normal generator tails") {
    NormalGenerator g(RngStream(2024));
    const int n = 4'000'000;
    int beyond2 = 0;
    int beyond35 = 0;
    for (int i = 0; i < n; ++i) {
      const double z = std::abs(g.normal());
      beyond2 += z > 2.0;
      beyond35 += z > 3.5;
    }
    const double p2 = std::erfc(2.0 / std::sqrt(2.0));
    const double p35 = std::erfc(3.5 / std::sqrt(2.0));
    CHECK(std::abs(beyond2 - n * p2) < 5.0 * std::sqrt(n * p2));
    CHECK(std::abs(beyond35 - n * p35) < 5.0 * std::sqrt(n * p35));
  }
}
