#include "pesn/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "pesn/errors.hpp"

namespace pesn {

void EsnParams::validate() const {
  auto fail = [](const std::string& what) { throw DomainError("EsnParams: " + what); };
  if (reservoir_size < 1) fail("reservoir_size must be >= 1");
  if (!(leak >= 0.0 && leak <= 1.0)) fail("leak must lie in [0, 1]");
  if (!(noise >= 0.0) || !std::isfinite(noise)) fail("noise must be >= 0");
  if (!(sparsity > 0.0 && sparsity <= 1.0)) fail("sparsity must lie in (0, 1]");
  if (!(spectral_radius > 0.0) || !std::isfinite(spectral_radius)) fail("spectral_radius must be > 0");
  if (!(rls_lambda > 0.0 && rls_lambda <= 1.0)) fail("rls_lambda must lie in (0, 1]");
  if (!(rls_delta > 0.0) || !std::isfinite(rls_delta)) fail("rls_delta must be > 0");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) fail("ridge must be >= 0");
  if (!std::isfinite(input_scale) || !std::isfinite(feedback_scale)) fail("scales must be finite");
}

namespace {

double dense_spectral_radius(const SparseMatrix& w) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(w), false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("spectral_radius: dense eigensolver failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// Largest-modulus root of lambda^2 - alpha lambda - beta.
double pair_radius(double alpha, double beta) {
  const double disc = alpha * alpha + 4.0 * beta;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return std::max(std::abs(0.5 * (alpha + s)), std::abs(0.5 * (alpha - s)));
  }
  return std::sqrt(-beta);
}

}  // namespace

double spectral_radius(const SparseMatrix& w, const RngStream& rng, double tol) {
  if (w.rows() != w.cols()) {
    throw ShapeError("spectral_radius: matrix must be square");
  }
  const Eigen::Index n = w.rows();
  if (w.nonZeros() == 0) {
    return 0.0;
  }
  if (n <= 2) {
    return dense_spectral_radius(w);
  }
  NormalGenerator gen(rng);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gen.normal();
  v.normalize();

  constexpr int kMaxIter = 50000;
  double previous = -1.0;
  int stable = 0;
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd u = w * v;
    const double nu = u.norm();
    if (nu == 0.0 || !std::isfinite(nu)) {
      return dense_spectral_radius(w);
    }
    u /= nu;
    Eigen::VectorXd x = w * u;
    // Fit x = alpha u + beta v in least squares; the 2x2 normal equations.
    const double uu = 1.0;
    const double vv = 1.0;
    const double uv = u.dot(v);
    const double ux = u.dot(x);
    const double vx = v.dot(x);
    const double det = uu * vv - uv * uv;
    double estimate;
    if (det < 1e-14) {
      estimate = std::abs(ux);
    } else {
      const double alpha = (ux * vv - vx * uv) / det;
      const double beta_scaled = (vx * uu - ux * uv) / det;
      // With u = W v / nu the fit reads W^2 v = alpha W v + (beta_scaled nu) v.
      estimate = pair_radius(alpha, beta_scaled * nu);
    }
    if (std::abs(estimate - previous) <= tol * std::max(1.0, estimate)) {
      if (++stable >= 5) {
        return estimate;
      }
    } else {
      stable = 0;
    }
    previous = estimate;
    v = u;
  }
  return dense_spectral_radius(w);
}

Eigen::VectorXd initial_state(Eigen::Index n, const RngStream& rng) {
  NormalGenerator gen(rng);
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = gen.normal();
  return h;
}

EsnWeights init_reservoir(const EsnParams& params, EsnDims dims, const RngStream& rng) {
  params.validate();
  if (dims.inputs < 1 || dims.outputs < 1) {
    throw ShapeError("init_reservoir: need at least one input and one output");
  }
  const Eigen::Index nh = params.reservoir_size;
  EsnWeights out;
  out.dims = dims;
  out.params = params;
  out.seed = rng.seed();
  out.stream = rng.stream_id();

  NormalGenerator gen(rng.child(0));
  out.w_in.resize(nh, dims.inputs);
  for (Eigen::Index j = 0; j < out.w_in.cols(); ++j)
    for (Eigen::Index i = 0; i < nh; ++i) out.w_in(i, j) = params.input_scale * gen.normal();
  out.w_fb.resize(nh, dims.outputs);
  for (Eigen::Index j = 0; j < out.w_fb.cols(); ++j)
    for (Eigen::Index i = 0; i < nh; ++i) out.w_fb(i, j) = params.feedback_scale * gen.normal();

  const auto total = static_cast<std::uint64_t>(nh) * static_cast<std::uint64_t>(nh);
  const auto count = std::clamp<std::uint64_t>(
      static_cast<std::uint64_t>(std::llround(params.sparsity * static_cast<double>(total))), 1, total);

  for (int attempt = 0; attempt < 8; ++attempt) {
    NormalGenerator mask_gen(rng.child(1).child(static_cast<std::uint64_t>(attempt)));
    // Partial Fisher-Yates over the flat index range picks exactly `count` cells.
    std::vector<std::uint64_t> cells(total);
    std::iota(cells.begin(), cells.end(), std::uint64_t{0});
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::uint64_t j = i + mask_gen.below(total - i);
      std::swap(cells[i], cells[j]);
    }
    cells.resize(count);
    std::sort(cells.begin(), cells.end());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(count);
    for (std::uint64_t c : cells) {
      const double value = mask_gen.normal();
      if (value != 0.0) {
        triplets.emplace_back(static_cast<Eigen::Index>(c / static_cast<std::uint64_t>(nh)),
                              static_cast<Eigen::Index>(c % static_cast<std::uint64_t>(nh)), value);
      }
    }
    SparseMatrix w(nh, nh);
    w.setFromTriplets(triplets.begin(), triplets.end());
    const double radius = spectral_radius(w, rng.child(2).child(static_cast<std::uint64_t>(attempt)));
    if (w.nonZeros() == 0 || !(radius > 1e-12)) {
      continue;
    }
    w *= params.spectral_radius / radius;
    out.w = std::move(w);
    out.w_out = Eigen::MatrixXd::Zero(dims.outputs, out.regressors());
    return out;
  }
  throw NumericError("init_reservoir: reservoir matrix has zero spectral radius after 8 masks");
}

Eigen::VectorXd esn_step(const Eigen::VectorXd& h, const Eigen::VectorXd& z, const Eigen::VectorXd& y_prev,
                         const EsnWeights& w, NormalGenerator* noise) {
  if (h.size() != w.hidden() || z.size() != w.dims.inputs || y_prev.size() != w.dims.outputs) {
    throw ShapeError("esn_step: state/input/feedback sizes do not match the weights");
  }
  const double leak = w.params.leak;
  Eigen::VectorXd a = w.w_in * z + w.w_fb * y_prev + w.w * h;
  Eigen::VectorXd next = (1.0 - leak) * h + leak * a.array().tanh().matrix();
  if (noise != nullptr && w.params.noise > 0.0) {
    for (Eigen::Index i = 0; i < next.size(); ++i) next[i] += w.params.noise * noise->normal();
  }
  return next;
}

Eigen::VectorXd regressor(const Eigen::VectorXd& z, const Eigen::VectorXd& h) {
  Eigen::VectorXd b(1 + z.size() + h.size());
  b << 1.0, z, h;
  return b;
}

DriveRecord drive_teacher_forced(const EsnWeights& w, const Dataset& data, const Eigen::VectorXd& h0,
                                 const RngStream& noise_rng) {
  data.validate();
  if (data.input_dim() != w.dims.inputs || data.output_dim() != w.dims.outputs) {
    throw ShapeError("drive_teacher_forced: dataset dims do not match the weights");
  }
  if (data.train_end <= data.washout) {
    throw DomainError("drive_teacher_forced: empty training window");
  }
  const auto n_train = static_cast<Eigen::Index>(data.train_end - data.washout);
  DriveRecord rec;
  rec.regressors.resize(w.regressors(), n_train);
  rec.targets.resize(w.dims.outputs, n_train);
  NormalGenerator gen(noise_rng);
  Eigen::VectorXd h = h0;
  Eigen::VectorXd y_prev = Eigen::VectorXd::Zero(w.dims.outputs);
  for (std::size_t k = 0; k < data.train_end; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd z = data.z.row(row).transpose();
    h = esn_step(h, z, y_prev, w, &gen);
    if (k >= data.washout) {
      const auto col = static_cast<Eigen::Index>(k - data.washout);
      rec.regressors.col(col) = regressor(z, h);
      rec.targets.col(col) = data.y.row(row).transpose();
    }
    y_prev = data.y.row(row).transpose();
  }
  rec.final_state = h;
  return rec;
}

Eigen::MatrixXd solve_readout(const Eigen::MatrixXd& regressors, const Eigen::MatrixXd& targets, double ridge) {
  if (regressors.cols() != targets.cols()) {
    throw ShapeError("solve_readout: regressor and target column counts differ");
  }
  if (ridge > 0.0) {
    Eigen::MatrixXd gram = regressors * regressors.transpose();
    gram.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) {
      throw NumericError("solve_readout: regularised Gram matrix factorisation failed");
    }
    return ldlt.solve(regressors * targets.transpose()).transpose();
  }
  if (regressors.cols() < regressors.rows()) {
    throw NumericError("solve_readout: fewer training columns than regressors; enable ridge");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(regressors.transpose());
  qr.setThreshold(1e-12);
  if (qr.rank() < regressors.rows()) {
    throw NumericError("solve_readout: regressor matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                       " of " + std::to_string(regressors.rows()) + "); enable ridge");
  }
  Eigen::MatrixXd solution = qr.solve(targets.transpose()).transpose();
  if (!solution.allFinite()) {
    throw NumericError("solve_readout: non-finite solution");
  }
  return solution;
}

Eigen::MatrixXd train_batch(const EsnWeights& w, const Dataset& data, const Eigen::VectorXd& h0,
                            const RngStream& rng) {
  const DriveRecord rec = drive_teacher_forced(w, data, h0, rng.child(1));
  return solve_readout(rec.regressors, rec.targets, w.params.ridge);
}

Eigen::MatrixXd train_batch(const EsnWeights& w, const Dataset& data, const RngStream& rng) {
  return train_batch(w, data, initial_state(w.hidden(), rng.child(0)), rng);
}

RlsState RlsState::start(Eigen::MatrixXd w_out, double delta) {
  if (!(delta > 0.0)) {
    throw DomainError("RlsState: delta must be > 0");
  }
  RlsState s;
  const Eigen::Index n = w_out.cols();
  s.w_out = std::move(w_out);
  s.p = Eigen::MatrixXd::Identity(n, n) * delta;
  return s;
}

void RlsState::update(const Eigen::VectorXd& b, const Eigen::VectorXd& y, double lambda) {
  if (b.size() != w_out.cols() || y.size() != w_out.rows()) {
    throw ShapeError("RlsState::update: regressor/target sizes do not match W_out");
  }
  const Eigen::VectorXd pb = p * b;
  const double denom = lambda + b.dot(pb);
  const Eigen::VectorXd g = pb / denom;
  if (!g.allFinite() || !(denom > 0.0)) {
    throw NumericError("RlsState::update: non-finite gain");
  }
  const Eigen::VectorXd innovation = y - w_out * b;
  w_out.noalias() += innovation * g.transpose();
  // P b = pb and b^T P = pb^T for symmetric P.
  p.noalias() -= g * pb.transpose();
  p /= lambda;
  p = 0.5 * (p + p.transpose()).eval();
  if (!w_out.allFinite() || !p.allFinite()) {
    throw NumericError("RlsState::update: non-finite state");
  }
}

Eigen::VectorXd next_input_from_data(std::size_t k, const Eigen::VectorXd& /*z*/, const Eigen::VectorXd& /*y_hat*/,
                                     const Dataset& data) {
  return data.z.row(static_cast<Eigen::Index>(k + 1)).transpose();
}

PredictResult esn_predict(const EsnWeights& w, const Dataset& data, const Eigen::VectorXd& h0,
                          const PredictOptions& options, const RngStream& rng) {
  data.validate();
  if (data.input_dim() != w.dims.inputs || data.output_dim() != w.dims.outputs) {
    throw ShapeError("esn_predict: dataset dims do not match the weights");
  }
  if (h0.size() != w.hidden()) {
    throw ShapeError("esn_predict: h0 has the wrong length");
  }
  if (options.horizon < 1 || options.washout > options.start) {
    throw DomainError("esn_predict: need horizon >= 1 and washout <= start");
  }
  const bool multi = options.mode == PredictMode::multi;
  // Multi mode reads z(start + horizon) through the next-input hook.
  const std::size_t needed = options.start + options.horizon + (multi ? 1 : 0);
  if (needed > data.rows()) {
    throw DomainError("esn_predict: window [" + std::to_string(options.start) + ", " + std::to_string(needed) +
                      ") exceeds the " + std::to_string(data.rows()) + " data rows");
  }

  NormalGenerator gen(rng.child(0));
  NormalGenerator* noise = options.noise ? &gen : nullptr;
  const Eigen::Index ny = w.dims.outputs;
  const auto horizon = static_cast<Eigen::Index>(options.horizon);

  PredictResult out;
  out.predictions.resize(horizon, ny);
  out.errors.resize(horizon, ny);
  out.inputs.resize(horizon, w.dims.inputs);
  if (multi) out.next_inputs.resize(horizon, w.dims.inputs);

  if (options.input_noise.size() != 0 && options.input_noise.size() != w.dims.inputs) {
    throw ShapeError("esn_predict: input_noise has the wrong length");
  }
  NormalGenerator input_gen(rng.child(1));
  const Eigen::VectorXd input_sd = options.input_noise.cwiseMax(0.0).cwiseSqrt();
  auto z_row = [&](std::size_t k) -> Eigen::VectorXd {
    Eigen::VectorXd z = data.z.row(static_cast<Eigen::Index>(k)).transpose();
    for (Eigen::Index j = 0; j < input_sd.size(); ++j) z[j] += input_sd[j] * input_gen.normal();
    return z;
  };
  auto y_row = [&](std::size_t k) -> Eigen::VectorXd { return data.y.row(static_cast<Eigen::Index>(k)).transpose(); };
  auto feedback_before = [&](std::size_t k) -> Eigen::VectorXd {
    return k == 0 ? Eigen::VectorXd::Zero(ny) : y_row(k - 1);
  };

  Eigen::VectorXd h = h0;
  const std::size_t first = options.start - options.washout;
  for (std::size_t k = first; k < options.start; ++k) {
    h = esn_step(h, z_row(k), feedback_before(k), w, noise);
    if (options.record_washout) {
      out.washout_hidden.insert(out.washout_hidden.end(), h.data(), h.data() + h.size());
    }
  }

  RlsState rls = RlsState::start(w.w_out, w.params.rls_delta);
  Eigen::VectorXd y_fb = feedback_before(options.start);
  Eigen::VectorXd z = z_row(options.start);
  for (Eigen::Index s = 0; s < horizon; ++s) {
    const std::size_t k = options.start + static_cast<std::size_t>(s);
    h = esn_step(h, z, y_fb, w, noise);
    const Eigen::VectorXd b = regressor(z, h);
    const Eigen::VectorXd y_hat = rls.w_out * b;
    const Eigen::VectorXd truth = y_row(k);
    out.inputs.row(s) = z.transpose();
    out.predictions.row(s) = y_hat.transpose();
    out.errors.row(s) = (y_hat - truth).transpose();
    if (!multi) {
      if (options.rls) rls.update(b, truth, w.params.rls_lambda);
      y_fb = truth;
      if (s + 1 < horizon) z = z_row(k + 1);
    } else {
      if (options.rls_in_multi) rls.update(b, truth, w.params.rls_lambda);
      y_fb = y_hat;
      z = options.next_input ? options.next_input(k, z, y_hat, data) : next_input_from_data(k, z, y_hat, data);
      out.next_inputs.row(s) = z.transpose();
    }
  }
  out.final_state = h;
  return out;
}

EnsembleResult mc_ensemble_rollout(const EsnWeights& w, const Dataset& data, std::size_t n_trials,
                                   const PredictOptions& options, const RngStream& rng) {
  if (n_trials < 1) {
    throw DomainError("mc_ensemble_rollout: need at least one trial");
  }
  EnsembleResult out;
  out.trials.resize(n_trials);
  const auto trials = static_cast<long long>(n_trials);
#pragma omp parallel for schedule(dynamic)
  for (long long t = 0; t < trials; ++t) {
    const RngStream trial_rng = rng.child(static_cast<std::uint64_t>(t));
    const Eigen::VectorXd h0 = initial_state(w.hidden(), trial_rng.child(0));
    out.trials[static_cast<std::size_t>(t)] = esn_predict(w, data, h0, options, trial_rng.child(1));
  }
  out.trial_mae.resize(static_cast<Eigen::Index>(n_trials), w.dims.outputs);
  for (std::size_t t = 0; t < n_trials; ++t) {
    const auto& trial = out.trials[t];
    out.trial_mae.row(static_cast<Eigen::Index>(t)) = trial.errors.cwiseAbs().colwise().mean();
    out.washout_hidden.insert(out.washout_hidden.end(), trial.washout_hidden.begin(), trial.washout_hidden.end());
  }
  return out;
}

}  // namespace pesn
