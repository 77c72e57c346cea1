#include "pesn/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pesn/errors.hpp"
#include "pesn/rng.hpp"
#include "pesn/text.hpp"

namespace pesn {

void CartPoleParams::validate() const {
  if (!(cart_mass > 0.0) || !(pole_mass > 0.0) || !(half_length > 0.0) || !(dt > 0.0)) {
    throw DomainError("CartPoleParams: masses, half_length and dt must be > 0");
  }
  if (!(force_limit >= 0.0) || !std::isfinite(gravity)) {
    throw DomainError("CartPoleParams: force_limit must be >= 0 and gravity finite");
  }
}

CartPoleState cartpole_derivative(const CartPoleState& s, double u, const CartPoleParams& p) {
  const double total = p.cart_mass + p.pole_mass;
  const double pml = p.pole_mass * p.half_length;
  const double sin_t = std::sin(s.theta);
  const double cos_t = std::cos(s.theta);
  const double temp = (u + pml * s.omega * s.omega * sin_t) / total;
  const double omega_dot = (p.gravity * sin_t - cos_t * temp) /
                           (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total));
  const double x_ddot = temp - pml * omega_dot * cos_t / total;
  return {s.x_dot, s.omega, x_ddot, omega_dot};
}

namespace {

CartPoleState axpy(const CartPoleState& s, double h, const CartPoleState& d) {
  return {s.x + h * d.x, s.theta + h * d.theta, s.x_dot + h * d.x_dot, s.omega + h * d.omega};
}

}  // namespace

CartPoleState cartpole_step(const CartPoleState& s, double u, const CartPoleParams& p, Integrator integrator) {
  const double dt = p.dt;
  if (integrator == Integrator::euler) {
    return axpy(s, dt, cartpole_derivative(s, u, p));
  }
  const CartPoleState k1 = cartpole_derivative(s, u, p);
  const CartPoleState k2 = cartpole_derivative(axpy(s, 0.5 * dt, k1), u, p);
  const CartPoleState k3 = cartpole_derivative(axpy(s, 0.5 * dt, k2), u, p);
  const CartPoleState k4 = cartpole_derivative(axpy(s, dt, k3), u, p);
  const double w = dt / 6.0;
  return {s.x + w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.theta + w * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta),
          s.x_dot + w * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot),
          s.omega + w * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega)};
}

double cartpole_energy(const CartPoleState& s, const CartPoleParams& p) {
  const double total = p.cart_mass + p.pole_mass;
  const double m = p.pole_mass;
  const double l = p.half_length;
  return 0.5 * total * s.x_dot * s.x_dot + m * l * s.x_dot * s.omega * std::cos(s.theta) +
         (2.0 / 3.0) * m * l * l * s.omega * s.omega + m * p.gravity * l * std::cos(s.theta);
}

Trajectory cartpole_rollout(const CartPoleState& s0, std::span<const double> controls, const CartPoleParams& p,
                            Integrator integrator) {
  p.validate();
  Trajectory traj;
  traj.controls.assign(controls.begin(), controls.end());
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(s0);
  for (std::size_t k = 0; k < controls.size(); ++k) {
    const CartPoleState next = cartpole_step(traj.states.back(), controls[k], p, integrator);
    if (!next.vec().allFinite()) {
      throw NumericError("cartpole_rollout: state diverged at step " + std::to_string(k));
    }
    traj.states.push_back(next);
  }
  return traj;
}

Excitation parse_excitation(std::string_view name) {
  if (name == "sum-of-sines") return Excitation::sum_of_sines;
  if (name == "filtered-noise") return Excitation::filtered_noise;
  throw ConfigError("unknown excitation '" + std::string(name) + "' (expected sum-of-sines or filtered-noise)");
}

std::string_view excitation_name(Excitation e) {
  return e == Excitation::sum_of_sines ? "sum-of-sines" : "filtered-noise";
}

std::vector<double> make_excitation(std::size_t n, Excitation kind, double amplitude, std::uint64_t seed,
                                    const CartPoleParams& p) {
  p.validate();
  NormalGenerator gen(RngStream(seed, 0x65786369ULL));
  std::vector<double> u(n, 0.0);
  if (kind == Excitation::sum_of_sines) {
    constexpr int kTerms = 5;
    const double each = amplitude / std::sqrt(static_cast<double>(kTerms));
    double freq[kTerms];
    double phase[kTerms];
    for (int i = 0; i < kTerms; ++i) {
      freq[i] = 0.1 + 1.4 * gen.uniform();
      phase[i] = 2.0 * std::numbers::pi * gen.uniform();
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * p.dt;
      double v = 0.0;
      for (int i = 0; i < kTerms; ++i) v += each * std::sin(2.0 * std::numbers::pi * freq[i] * t + phase[i]);
      u[k] = v;
    }
  } else {
    const double a = std::exp(-p.dt / 0.2);
    const double gain = std::sqrt(1.0 - a * a) * amplitude;
    double state = amplitude * gen.normal();
    for (std::size_t k = 0; k < n; ++k) {
      state = a * state + gain * gen.normal();
      u[k] = state;
    }
  }
  for (double& v : u) v = std::clamp(v, -p.force_limit, p.force_limit);
  return u;
}

Dataset make_dataset(const DatasetOptions& options, const CartPoleParams& p) {
  p.validate();
  if (options.n_steps < options.washout + 2) {
    throw DomainError("make_dataset: n_steps must exceed the washout by at least 2");
  }
  if (!(options.train_fraction > 0.0 && options.train_fraction <= 1.0)) {
    throw DomainError("make_dataset: train_fraction must lie in (0, 1]");
  }
  const auto controls = make_excitation(options.n_steps, options.excitation, options.amplitude, options.seed, p);
  const Trajectory traj = cartpole_rollout(options.initial, controls, p, options.integrator);

  Dataset data;
  const auto n = static_cast<Eigen::Index>(options.n_steps);
  data.z.resize(n, 5);
  data.y.resize(n, 2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& s = traj.states[static_cast<std::size_t>(k)];
    const auto& next = traj.states[static_cast<std::size_t>(k) + 1];
    data.z.row(k) << s.x, s.theta, s.x_dot, s.omega, controls[static_cast<std::size_t>(k)];
    data.y.row(k) << next.x_dot, next.omega;
  }
  data.washout = options.washout;
  data.train_end = std::max(options.washout + 1,
                            static_cast<std::size_t>(std::llround(options.train_fraction * static_cast<double>(n))));
  data.train_end = std::min(data.train_end, options.n_steps);

  data.metadata["source"] = "cartpole";
  data.metadata["cart_mass_kg"] = format_double(p.cart_mass);
  data.metadata["pole_mass_kg"] = format_double(p.pole_mass);
  data.metadata["pole_half_length_m"] = format_double(p.half_length);
  data.metadata["gravity_m_s2"] = format_double(p.gravity);
  data.metadata["dt_s"] = format_double(p.dt);
  data.metadata["force_limit_n"] = format_double(p.force_limit);
  data.metadata["integrator"] = options.integrator == Integrator::rk4 ? "rk4" : "euler";
  data.metadata["excitation"] = std::string(excitation_name(options.excitation));
  data.metadata["amplitude_n"] = format_double(options.amplitude);
  data.metadata["seed"] = std::to_string(options.seed);
  data.metadata["initial_state"] = format_double(options.initial.x) + " " + format_double(options.initial.theta) +
                                   " " + format_double(options.initial.x_dot) + " " +
                                   format_double(options.initial.omega);
  data.metadata["columns"] = "z = [x m, theta rad (0 upright), x_dot m/s, omega rad/s, u N]; y = [x_dot, omega] at k+1";
  data.validate();
  return data;
}

Eigen::VectorXd cartpole_next_input(std::size_t k, const Eigen::VectorXd& z, const Eigen::VectorXd& y_hat,
                                    const Dataset& data, double dt) {
  Eigen::VectorXd next(5);
  next[0] = z[0] + 0.5 * dt * (z[2] + y_hat[0]);
  next[1] = z[1] + 0.5 * dt * (z[3] + y_hat[1]);
  next[2] = y_hat[0];
  next[3] = y_hat[1];
  next[4] = data.z(static_cast<Eigen::Index>(k + 1), 4);
  return next;
}

DiagonalGaussian cartpole_next_input_belief(std::size_t k, const DiagonalGaussian& z, const DiagonalGaussian& y_hat,
                                            const Dataset& data, double dt) {
  const Eigen::VectorXd mean = cartpole_next_input(k, z.mean(), y_hat.mean(), data, dt);
  const double h2 = 0.25 * dt * dt;
  Eigen::VectorXd var(5);
  var[0] = z.variance()[0] + h2 * (z.variance()[2] + y_hat.variance()[0]);
  var[1] = z.variance()[1] + h2 * (z.variance()[3] + y_hat.variance()[1]);
  var[2] = y_hat.variance()[0];
  var[3] = y_hat.variance()[1];
  var[4] = 0.0;
  return {mean, var};
}

}  // namespace pesn
