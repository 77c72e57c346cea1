#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "pesn/dataset.hpp"
#include "pesn/rng.hpp"

namespace pesn {

struct EsnParams {
  int reservoir_size = 100;  ///< N_h
  double leak = 0.5;         ///< L in [0, 1]
  double noise = 0.0;        ///< M_e >= 0
  double sparsity = 0.1;     ///< fraction of nonzeros in W, (0, 1]
  double spectral_radius = 0.9;
  std::size_t washout = 50;
  double rls_lambda = 1.0;  ///< forgetting factor in (0, 1]
  double rls_delta = 1e6;   ///< P0 = delta * I
  double ridge = 0.0;       ///< added to B B^T when > 0
  double input_scale = 1.0;
  double feedback_scale = 1.0;

  /// Throws DomainError naming the offending field.
  void validate() const;
};

struct EsnDims {
  Eigen::Index inputs = 0;   ///< N_x + N_u
  Eigen::Index outputs = 0;  ///< N_x
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct EsnWeights {
  EsnDims dims;
  EsnParams params;
  Eigen::MatrixXd w_in;   ///< N_h x inputs
  Eigen::MatrixXd w_fb;   ///< N_h x outputs
  SparseMatrix w;         ///< N_h x N_h
  Eigen::MatrixXd w_out;  ///< outputs x (1 + inputs + N_h)
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  [[nodiscard]] Eigen::Index hidden() const { return w.rows(); }
  [[nodiscard]] Eigen::Index regressors() const { return 1 + dims.inputs + hidden(); }
};

/// Largest eigenvalue magnitude of a square matrix. Power iteration with a
/// two-term fit, so a dominant complex pair is handled; falls back to a dense
/// eigensolver when the iteration stalls.
[[nodiscard]] double spectral_radius(const SparseMatrix& w, const RngStream& rng, double tol = 1e-12);

/// Random reservoir: standard normal entries, W masked to exactly
/// round(s N_h^2) nonzeros (at least one) and rescaled to spectral radius r.
/// A mask whose matrix has zero spectral radius is redrawn, up to 8 times.
[[nodiscard]] EsnWeights init_reservoir(const EsnParams& params, EsnDims dims, const RngStream& rng);

/// h' = (1-L) h + L tanh(W_in z + W_fb y_prev + W h) + M_e dw. `noise` may be
/// null, in which case dw is omitted.
[[nodiscard]] Eigen::VectorXd esn_step(const Eigen::VectorXd& h, const Eigen::VectorXd& z, const Eigen::VectorXd& y_prev,
                                       const EsnWeights& w, NormalGenerator* noise = nullptr);

/// Regressor b = [1; z; h].
[[nodiscard]] Eigen::VectorXd regressor(const Eigen::VectorXd& z, const Eigen::VectorXd& h);

/// Draws h0 ~ N(0, I).
[[nodiscard]] Eigen::VectorXd initial_state(Eigen::Index n, const RngStream& rng);

/// Regressors collected by driving the reservoir over [0, train_end) with
/// teacher forcing (y(k-1) from the data, y(-1) = 0). Columns start at the
/// washout.
struct DriveRecord {
  Eigen::MatrixXd regressors;  ///< (1 + inputs + N_h) x n_train
  Eigen::MatrixXd targets;     ///< outputs x n_train
  Eigen::VectorXd final_state;
};

[[nodiscard]] DriveRecord drive_teacher_forced(const EsnWeights& w, const Dataset& data, const Eigen::VectorXd& h0,
                                               const RngStream& noise_rng);

/// Least squares W_out = Y B^T (B B^T + ridge I)^-1. ridge == 0 solves through
/// a rank-revealing QR of B^T and throws NumericError when B is rank deficient.
[[nodiscard]] Eigen::MatrixXd solve_readout(const Eigen::MatrixXd& regressors, const Eigen::MatrixXd& targets,
                                            double ridge);

/// Teacher-forced batch training. h0 ~ N(0, I) from rng.child(0) unless given.
[[nodiscard]] Eigen::MatrixXd train_batch(const EsnWeights& w, const Dataset& data, const RngStream& rng);
[[nodiscard]] Eigen::MatrixXd train_batch(const EsnWeights& w, const Dataset& data, const Eigen::VectorXd& h0,
                                          const RngStream& rng);

/// Recursive least squares state for the readout.
struct RlsState {
  Eigen::MatrixXd w_out;
  Eigen::MatrixXd p;

  [[nodiscard]] static RlsState start(Eigen::MatrixXd w_out, double delta);

  /// g = P b / (lambda + b^T P b); W_out += (y - W_out b) g^T; P = (P - g b^T P) / lambda.
  /// Throws NumericError on a non-finite gain.
  void update(const Eigen::VectorXd& b, const Eigen::VectorXd& y, double lambda);
};

enum class PredictMode { single, multi };

/// Produces z(k+1) for free-running prediction from z(k) and the predicted
/// y(k). The default takes the next row of the data.
using NextInput = std::function<Eigen::VectorXd(std::size_t k, const Eigen::VectorXd& z, const Eigen::VectorXd& y_hat,
                                                const Dataset& data)>;

[[nodiscard]] Eigen::VectorXd next_input_from_data(std::size_t k, const Eigen::VectorXd& z, const Eigen::VectorXd& y_hat,
                                                   const Dataset& data);

struct PredictOptions {
  PredictMode mode = PredictMode::single;
  std::size_t start = 0;         ///< first predicted row
  std::size_t washout = 0;       ///< teacher-forced rows [start - washout, start)
  std::size_t horizon = 1;
  bool rls = true;               ///< RLS on ground truth in single mode
  bool rls_in_multi = false;     ///< update against y(k) from the data during free running
  bool noise = false;            ///< draw M_e dw
  NextInput next_input;          ///< multi mode; null means next_input_from_data
  bool record_washout = false;   ///< keep hidden values seen during washout
  /// Per-column variance of Gaussian noise added to every z row read from the
  /// data; empty means exact inputs.
  Eigen::VectorXd input_noise;
};

struct PredictResult {
  Eigen::MatrixXd predictions;  ///< horizon x outputs
  Eigen::MatrixXd errors;       ///< predictions - y(k)
  Eigen::MatrixXd inputs;       ///< horizon x inputs: z used at each step
  Eigen::MatrixXd next_inputs;  ///< multi mode: z(k+1) handed to the next step
  std::vector<double> washout_hidden;
  Eigen::VectorXd final_state;
};

/// Runs the washout (teacher forced, no outputs) and then `horizon` steps.
/// Single mode feeds y(k) from the data back and applies RLS against it; multi
/// mode feeds predictions back with W_out frozen. Throws DomainError when the
/// window does not fit the data.
[[nodiscard]] PredictResult esn_predict(const EsnWeights& w, const Dataset& data, const Eigen::VectorXd& h0,
                                        const PredictOptions& options, const RngStream& rng);

struct EnsembleResult {
  std::vector<PredictResult> trials;
  /// Per trial mean over the horizon of |error|, trials x outputs.
  Eigen::MatrixXd trial_mae;
  /// Hidden values visited during washout, pooled over trials.
  std::vector<double> washout_hidden;
};

/// Multi-step rollouts from n_trials initial states h0 ~ N(0, I); trial t
/// draws from rng.child(t).
[[nodiscard]] EnsembleResult mc_ensemble_rollout(const EsnWeights& w, const Dataset& data, std::size_t n_trials,
                                                 const PredictOptions& options, const RngStream& rng);

}  // namespace pesn
