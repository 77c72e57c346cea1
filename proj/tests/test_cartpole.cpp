#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "pesn/cartpole.hpp"
#include "pesn/errors.hpp"

using namespace pesn;

TEST_SUITE("cartpole") {
  TEST_CASE("equilibria") {
    const CartPoleParams p;
    for (double theta : {0.0, std::numbers::pi}) {
      const auto d = cartpole_derivative({0.3, theta, 0.0, 0.0}, 0.0, p);
      CHECK(d.x == 0.0);
      CHECK(d.theta == 0.0);
      CHECK(std::abs(d.x_dot) < 1e-15);
      CHECK(std::abs(d.omega) < 1e-14);
    }
    const auto pushed = cartpole_derivative({}, 1.0, p);
    CHECK(pushed.x_dot > 0.0);
    CHECK(pushed.omega < 0.0);
  }

  TEST_CASE("mirror symmetry") {
    const CartPoleParams p;
    const CartPoleState s{0.2, 0.7, -1.1, 2.3};
    const auto a = cartpole_derivative(s, 3.0, p);
    const auto b = cartpole_derivative({-s.x, -s.theta, -s.x_dot, -s.omega}, -3.0, p);
    CHECK(a.x_dot == doctest::Approx(-b.x_dot).epsilon(1e-14));
    CHECK(a.omega == doctest::Approx(-b.omega).epsilon(1e-14));
  }

  TEST_CASE("energy is conserved without force") {
    CartPoleParams p;
    p.dt = 1e-4;
    CartPoleState s{0.0, 2.0, 0.5, -1.0};
    const double e0 = cartpole_energy(s, p);
    for (int k = 0; k < 100000; ++k) s = cartpole_step(s, 0.0, p);
    CHECK(std::abs(cartpole_energy(s, p) - e0) <= 1e-3 * std::abs(e0));
  }

  TEST_CASE("upright equilibrium stays put") {
    const std::vector<double> u(500, 0.0);
    const auto t = cartpole_rollout({}, u, CartPoleParams{});
    CHECK(t.states.size() == 501);
    CHECK(t.states.back().vec().isZero());
  }

  TEST_CASE("rk4 converges at fourth order") {
    auto run = [](double dt, int steps) {
      CartPoleParams p;
      p.dt = dt;
      CartPoleState s{0.0, 0.5, 0.0, 0.0};
      for (int k = 0; k < steps; ++k) s = cartpole_step(s, 1.0, p);
      return s.vec();
    };
    const Eigen::Vector4d ref = run(1e-4, 10000);
    const double e1 = (run(0.02, 50) - ref).norm();
    const double e2 = (run(0.01, 100) - ref).norm();
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
    const double euler = [] {
      CartPoleParams p;
      CartPoleState s{0.0, 0.5, 0.0, 0.0};
      for (int k = 0; k < 50; ++k) s = cartpole_step(s, 1.0, p, Integrator::euler);
      return s.theta;
    }();
    CHECK(std::abs(euler - ref[1]) > 10.0 * e1);
  }

  TEST_CASE("divergence is reported") {
    CartPoleParams p;
    p.dt = 5.0;
    const std::vector<double> u(400, 0.0);
    CHECK_THROWS_AS((void)cartpole_rollout({0.0, 0.5, 0.0, 40.0}, u, p), NumericError);
    p.dt = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
  }

  TEST_CASE("excitation") {
    const CartPoleParams p;
    const auto a = make_excitation(3000, Excitation::sum_of_sines, 50.0, 3, p);
    const auto b = make_excitation(3000, Excitation::sum_of_sines, 50.0, 3, p);
    CHECK(a == b);
    bool clipped = false;
    for (double v : a) {
      CHECK(std::abs(v) <= p.force_limit);
      clipped = clipped || std::abs(v) == p.force_limit;
    }
    CHECK(clipped);
    for (double v : make_excitation(100, Excitation::filtered_noise, 0.0, 1, p)) CHECK(v == 0.0);
    CHECK(make_excitation(10, Excitation::filtered_noise, 1.0, 1, p) !=
          make_excitation(10, Excitation::filtered_noise, 1.0, 2, p));
    CHECK(parse_excitation("filtered-noise") == Excitation::filtered_noise);
    CHECK_THROWS_AS((void)parse_excitation("chirp"), ConfigError);
  }

  TEST_CASE("dataset layout") {
    DatasetOptions o;
    o.n_steps = 400;
    o.washout = 50;
    const CartPoleParams p;
    const auto d = make_dataset(o, p);
    CHECK(d.rows() == 400);
    CHECK(d.input_dim() == 5);
    CHECK(d.output_dim() == 2);
    CHECK(d.train_end == 240);
    CHECK(d.metadata.at("dt_s") == "0.02");
    for (Eigen::Index k = 0; k + 1 < 400; ++k) {
      CHECK(d.y(k, 0) == d.z(k + 1, 2));
      CHECK(d.y(k, 1) == d.z(k + 1, 3));
    }
    const CartPoleState s{d.z(10, 0), d.z(10, 1), d.z(10, 2), d.z(10, 3)};
    const auto next = cartpole_step(s, d.z(10, 4), p);
    CHECK(std::abs(next.x - d.z(11, 0)) < 1e-12);
    CHECK(std::abs(next.omega - d.y(10, 1)) < 1e-12);

    const auto again = make_dataset(o, p);
    CHECK(again.z == d.z);
    o.amplitude = 0.0;
    o.initial = {};
    const auto still = make_dataset(o, p);
    CHECK(still.z.isZero());
    o.n_steps = 20;
    CHECK_THROWS_AS((void)make_dataset(o, p), DomainError);
  }

  TEST_CASE("next input uses trapezoidal positions") {
    DatasetOptions o;
    o.n_steps = 200;
    o.washout = 20;
    const auto d = make_dataset(o, CartPoleParams{});
    const Eigen::VectorXd z = d.z.row(50).transpose();
    const Eigen::VectorXd y = d.y.row(50).transpose();
    const auto n = cartpole_next_input(50, z, y, d, 0.02);
    CHECK(n[0] == doctest::Approx(z[0] + 0.01 * (z[2] + y[0])));
    CHECK(n[2] == y[0]);
    CHECK(n[4] == d.z(51, 4));
    // the true next position is close to the trapezoid estimate
    CHECK(std::abs(n[1] - d.z(51, 1)) < 1e-3);

    const auto b = cartpole_next_input_belief(50, DiagonalGaussian(z, Eigen::VectorXd::Constant(5, 0.1)),
                                              DiagonalGaussian(y, Eigen::VectorXd::Constant(2, 0.2)), d, 0.02);
    CHECK(b.mean() == n);
    CHECK(b.variance()[0] == doctest::Approx(0.1 + 1e-4 * 0.3));
    CHECK(b.variance()[3] == 0.2);
    CHECK(b.variance()[4] == 0.0);
  }
}
