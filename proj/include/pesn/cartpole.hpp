#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pesn/dataset.hpp"
#include "pesn/gaussian.hpp"

namespace pesn {

/// Cart position x (m), pole angle theta (rad, 0 upright), and their rates.
struct CartPoleState {
  double x = 0.0;
  double theta = 0.0;
  double x_dot = 0.0;
  double omega = 0.0;

  [[nodiscard]] Eigen::Vector4d vec() const { return {x, theta, x_dot, omega}; }
  [[nodiscard]] static CartPoleState from(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

struct CartPoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double gravity = 9.81;
  double dt = 0.02;
  double force_limit = 10.0;

  void validate() const;
};

enum class Integrator { rk4, euler };

/// Frictionless cart-pole: returns (x_dot, omega, x_ddot, omega_dot).
[[nodiscard]] CartPoleState cartpole_derivative(const CartPoleState& s, double u, const CartPoleParams& p);

/// One integration step of length p.dt with force u held constant.
[[nodiscard]] CartPoleState cartpole_step(const CartPoleState& s, double u, const CartPoleParams& p,
                                          Integrator integrator = Integrator::rk4);

/// Mechanical energy with the pivot as the potential reference.
[[nodiscard]] double cartpole_energy(const CartPoleState& s, const CartPoleParams& p);

struct Trajectory {
  std::vector<CartPoleState> states;  ///< controls.size() + 1 entries
  std::vector<double> controls;
};

/// Integrates through every control value. Throws NumericError carrying the
/// step index when the state leaves the finite range.
[[nodiscard]] Trajectory cartpole_rollout(const CartPoleState& s0, std::span<const double> controls,
                                          const CartPoleParams& p, Integrator integrator = Integrator::rk4);

enum class Excitation { sum_of_sines, filtered_noise };

[[nodiscard]] Excitation parse_excitation(std::string_view name);
[[nodiscard]] std::string_view excitation_name(Excitation e);

/// Force sequence clipped to the force limit. Sum of sines: five seeded
/// incommensurate frequencies in [0.1, 1.5] Hz with random phases, each with
/// amplitude amplitude/sqrt(5). Filtered noise: first-order low-pass white
/// noise (time constant 0.2 s) with stationary standard deviation `amplitude`.
[[nodiscard]] std::vector<double> make_excitation(std::size_t n, Excitation kind, double amplitude,
                                                  std::uint64_t seed, const CartPoleParams& p);

struct DatasetOptions {
  std::size_t n_steps = 2000;
  Excitation excitation = Excitation::sum_of_sines;
  double amplitude = 5.0;
  std::uint64_t seed = 1;
  CartPoleState initial{0.0, 3.141592653589793, 0.0, 0.0};
  Integrator integrator = Integrator::rk4;
  std::size_t washout = 100;
  double train_fraction = 0.6;
};

/// Rows z(k) = [x, theta, x_dot, omega, u](k), targets y(k) = [x_dot, omega](k+1).
[[nodiscard]] Dataset make_dataset(const DatasetOptions& options, const CartPoleParams& p);

/// Next network input during free-running cart-pole prediction: velocities
/// from the prediction, positions advanced with the trapezoid rule, force
/// from the data row k+1.
[[nodiscard]] Eigen::VectorXd cartpole_next_input(std::size_t k, const Eigen::VectorXd& z, const Eigen::VectorXd& y_hat,
                                                  const Dataset& data, double dt);

/// Belief version of cartpole_next_input; cross-covariances are dropped.
[[nodiscard]] DiagonalGaussian cartpole_next_input_belief(std::size_t k, const DiagonalGaussian& z,
                                                          const DiagonalGaussian& y_hat, const Dataset& data,
                                                          double dt);

}  // namespace pesn
