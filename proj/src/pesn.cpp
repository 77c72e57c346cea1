#include "pesn/pesn.hpp"

#include <string>

#include "pesn/errors.hpp"
#include "pesn/moment_kernels.hpp"
#include "pesn/spline.hpp"

namespace pesn {

void PesnConfig::validate() const {
  esn.validate();
  if (engine == Engine::spline && (!(mesh_a < mesh_b) || mesh_points < 4)) {
    throw DomainError("PesnConfig: spline mesh needs a < b and at least 4 points");
  }
  if (engine == Engine::mc && mc_samples < 2) {
    throw DomainError("PesnConfig: mc_samples must be >= 2");
  }
  if (!(init_variance >= 0.0)) {
    throw DomainError("PesnConfig: init_variance must be >= 0");
  }
}

MomentEngine make_engine(const PesnConfig& cfg, const RngStream& rng) {
  const Activation tanh_act = Activation::make(ActivationId::tanh);
  switch (cfg.engine) {
    case Engine::analytic:
      return MomentEngine::analytic(tanh_act);
    case Engine::spline:
      return MomentEngine::spline(
          std::make_shared<const SplineTable>(build_spline_table(tanh_act, cfg.mesh_a, cfg.mesh_b, cfg.mesh_points)));
    case Engine::mc:
      return MomentEngine::monte_carlo(tanh_act, cfg.mc_samples, rng);
  }
  throw ConfigError("make_engine: unknown engine");
}

DiagonalGaussian activation_input_belief(const DiagonalGaussian& z, const DiagonalGaussian& y_prev,
                                         const DiagonalGaussian& h, const EsnWeights& w) {
  if (z.size() != w.dims.inputs || y_prev.size() != w.dims.outputs || h.size() != w.hidden()) {
    throw ShapeError("activation_input_belief: belief sizes do not match the weights");
  }
  Eigen::VectorXd mean = w.w_in * z.mean() + w.w_fb * y_prev.mean() + w.w * h.mean();
  Eigen::VectorXd var = w.w_in.cwiseAbs2() * z.variance() + w.w_fb.cwiseAbs2() * y_prev.variance() +
                        w.w.cwiseAbs2() * h.variance();
  return {std::move(mean), std::move(var)};
}

PesnStep pesn_step(const DiagonalGaussian& h, const DiagonalGaussian& z, const DiagonalGaussian& y_prev,
                   const EsnWeights& w, const MomentEngine& engine, bool noise_variance_squared,
                   std::uint64_t call_id) {
  const DiagonalGaussian a = activation_input_belief(z, y_prev, h, w);
  DiagonalGaussian act = propagate_moments(engine, a, call_id);
  const double leak = w.params.leak;
  const double added = noise_variance_squared ? w.params.noise * w.params.noise : w.params.noise;
  Eigen::VectorXd mean = (1.0 - leak) * h.mean() + leak * act.mean();
  Eigen::VectorXd var = (1.0 - leak) * (1.0 - leak) * h.variance() + leak * leak * act.variance();
  var.array() += added;
  return {DiagonalGaussian(std::move(mean), std::move(var)), std::move(act)};
}

DiagonalGaussian readout_belief(const DiagonalGaussian& z, const DiagonalGaussian& h, const Eigen::MatrixXd& w_out) {
  if (w_out.cols() != 1 + z.size() + h.size()) {
    throw ShapeError("readout_belief: W_out has " + std::to_string(w_out.cols()) + " columns, expected " +
                     std::to_string(1 + z.size() + h.size()));
  }
  Eigen::VectorXd mean_b(w_out.cols()), var_b(w_out.cols());
  mean_b << 1.0, z.mean(), h.mean();
  var_b << 0.0, z.variance(), h.variance();
  return {w_out * mean_b, w_out.cwiseAbs2() * var_b};
}

DiagonalGaussian initial_belief(const PesnConfig& cfg, Eigen::Index n, const RngStream& rng) {
  Eigen::VectorXd mean =
      cfg.init_mean == InitMean::sampled ? initial_state(n, rng) : Eigen::VectorXd::Zero(n).eval();
  return DiagonalGaussian::isotropic(std::move(mean), cfg.init_variance);
}

EsnWeights pesn_train(const PesnConfig& cfg, EsnDims dims, const Dataset& data, const RngStream& rng) {
  cfg.validate();
  EsnWeights w = init_reservoir(cfg.esn, dims, rng.child(0));
  const DiagonalGaussian h0 = initial_belief(cfg, w.hidden(), rng.child(1));
  // Training propagates means only; with a point-mass activation input the
  // moment engine reduces to tanh of the mean, i.e. the deterministic step.
  EsnWeights noiseless = w;
  noiseless.params.noise = 0.0;
  w.w_out = train_batch(noiseless, data, h0.mean(), rng.child(2));
  return w;
}

PesnPredictResult pesn_predict(const EsnWeights& w, const PesnConfig& cfg, const Dataset& data,
                               const DiagonalGaussian& h0, const PesnPredictOptions& options,
                               const MomentEngine& engine) {
  data.validate();
  if (data.input_dim() != w.dims.inputs || data.output_dim() != w.dims.outputs) {
    throw ShapeError("pesn_predict: dataset dims do not match the weights");
  }
  if (h0.size() != w.hidden()) {
    throw ShapeError("pesn_predict: initial belief has the wrong length");
  }
  if (options.horizon < 1 || options.washout > options.start) {
    throw DomainError("pesn_predict: need horizon >= 1 and washout <= start");
  }
  const bool multi = options.mode == PredictMode::multi;
  const std::size_t needed = options.start + options.horizon + (multi ? 1 : 0);
  if (needed > data.rows()) {
    throw DomainError("pesn_predict: window exceeds the data");
  }
  const Eigen::Index nz = w.dims.inputs;
  const Eigen::Index ny = w.dims.outputs;
  Eigen::VectorXd in_var = options.input_variance.size() == 0 ? Eigen::VectorXd::Zero(nz) : options.input_variance;
  if (in_var.size() != nz) {
    throw ShapeError("pesn_predict: input_variance has the wrong length");
  }

  auto z_belief = [&](std::size_t k) {
    return DiagonalGaussian(data.z.row(static_cast<Eigen::Index>(k)).transpose(), in_var);
  };
  auto y_point = [&](std::size_t k) {
    return DiagonalGaussian::point_mass(data.y.row(static_cast<Eigen::Index>(k)).transpose());
  };
  auto feedback_before = [&](std::size_t k) {
    return k == 0 ? DiagonalGaussian::point_mass(Eigen::VectorXd::Zero(ny)) : y_point(k - 1);
  };

  PesnPredictResult out;
  DiagonalGaussian h = h0;
  std::uint64_t call = 0;
  const std::size_t first = options.start - options.washout;
  for (std::size_t k = first; k < options.start; ++k) {
    h = pesn_step(h, z_belief(k), feedback_before(k), w, engine, cfg.noise_variance_squared, call++).hidden;
    if (cfg.washout_mean_only) {
      h = DiagonalGaussian::point_mass(h.mean());
    }
    if (options.record_washout) {
      out.washout_hidden_means.insert(out.washout_hidden_means.end(), h.mean().data(),
                                      h.mean().data() + h.size());
    }
  }

  RlsState rls = RlsState::start(w.w_out, w.params.rls_delta);
  const auto horizon = static_cast<Eigen::Index>(options.horizon);
  out.errors.resize(horizon, ny);
  DiagonalGaussian y_fb = feedback_before(options.start);
  DiagonalGaussian z = z_belief(options.start);
  for (Eigen::Index s = 0; s < horizon; ++s) {
    const std::size_t k = options.start + static_cast<std::size_t>(s);
    h = pesn_step(h, z, y_fb, w, engine, cfg.noise_variance_squared, call++).hidden;
    const DiagonalGaussian y = readout_belief(z, h, rls.w_out);
    const Eigen::VectorXd truth = data.y.row(static_cast<Eigen::Index>(k)).transpose();
    out.outputs.push_back(y);
    out.errors.row(s) = (y.mean() - truth).transpose();
    const bool update = multi ? cfg.rls_in_multi : options.rls;
    if (update) {
      rls.update(regressor(z.mean(), h.mean()), truth, w.params.rls_lambda);
    }
    if (!multi) {
      y_fb = y_point(k);
      if (s + 1 < horizon) z = z_belief(k + 1);
    } else {
      y_fb = y;
      z = options.next_input ? options.next_input(k, z, y, data)
                             : DiagonalGaussian::point_mass(data.z.row(static_cast<Eigen::Index>(k + 1)).transpose());
      out.next_inputs.push_back(z);
    }
  }
  out.final_hidden = h;
  return out;
}

}  // namespace pesn
