#include "pesn/moment_kernels.hpp"

#include <cmath>

#include "pesn/errors.hpp"

namespace pesn {

namespace {

MomentSet element_moments(const MomentEngine& engine, double mu, double var, const RngStream& call_stream,
                          std::uint64_t i) {
  if (engine.kind() == Engine::mc) {
    return mc_moments(engine.activation(), mu, var, engine.mc_samples(), call_stream.child(i));
  }
  return engine(mu, var);
}

}  // namespace

DiagonalGaussian propagate_moments(const MomentEngine& engine, const DiagonalGaussian& input, std::uint64_t call_id) {
  const Eigen::Index n = input.size();
  Eigen::VectorXd mean(n), var(n);
  const RngStream call_stream = engine.rng().child(call_id);
  const Eigen::VectorXd& mu = input.mean();
  const Eigen::VectorXd& sigma = input.variance();

#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const MomentSet m = element_moments(engine, mu[i], sigma[i], call_stream, static_cast<std::uint64_t>(i));
    mean[i] = m.mean;
    var[i] = m.variance;
  }
  if (!mean.allFinite() || !var.allFinite()) {
    throw NumericError("propagate_moments: non-finite moment");
  }
  return {std::move(mean), std::move(var)};
}

DiagonalGaussian propagate_moments_serial(const MomentEngine& engine, const DiagonalGaussian& input,
                                          std::uint64_t call_id) {
  const Eigen::Index n = input.size();
  Eigen::VectorXd mean(n), var(n);
  const RngStream call_stream = engine.rng().child(call_id);
  for (Eigen::Index i = 0; i < n; ++i) {
    MomentSet m;
    if (engine.kind() == Engine::spline) {
      m = spline_moments_reference(*engine.table(), input.mean()[i], input.variance()[i]);
    } else {
      m = element_moments(engine, input.mean()[i], input.variance()[i], call_stream, static_cast<std::uint64_t>(i));
    }
    mean[i] = m.mean;
    var[i] = m.variance;
  }
  if (!mean.allFinite() || !var.allFinite()) {
    throw NumericError("propagate_moments_serial: non-finite moment");
  }
  return {std::move(mean), std::move(var)};
}

}  // namespace pesn
