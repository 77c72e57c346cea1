#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "pesn/dataset.hpp"
#include "pesn/gaussian.hpp"
#include "pesn/moments.hpp"
#include "pesn/reservoir.hpp"

namespace pesn {

enum class InitMean { sampled, zero };

struct PesnConfig {
  EsnParams esn;
  Engine engine = Engine::spline;
  double mesh_a = -10.0;
  double mesh_b = 10.0;
  int mesh_points = 101;
  std::size_t mc_samples = 10000;
  InitMean init_mean = InitMean::sampled;  ///< mu0 ~ N(0, 1) per element, or 0
  double init_variance = 1.0;              ///< sigma0^2 for every element
  bool noise_variance_squared = false;     ///< add M_e^2 instead of M_e to the hidden variance
  bool washout_mean_only = false;          ///< washout carries means only, variance reset to 0
  bool rls_in_multi = false;

  void validate() const;
};

/// Builds the tanh moment engine described by cfg. MC draws from `rng`.
[[nodiscard]] MomentEngine make_engine(const PesnConfig& cfg, const RngStream& rng = {});

/// Belief over the pre-activation a = W_in z + W_fb y_prev + W h with all
/// cross-covariances dropped.
[[nodiscard]] DiagonalGaussian activation_input_belief(const DiagonalGaussian& z, const DiagonalGaussian& y_prev,
                                                       const DiagonalGaussian& h, const EsnWeights& w);

struct PesnStep {
  DiagonalGaussian hidden;
  DiagonalGaussian activation;  ///< moments of tanh(a)
};

/// mu_h' = (1-L) mu_h + L mu_tanh; var_h' = (1-L)^2 var_h + L^2 var_tanh + M_e
/// (M_e^2 with noise_variance_squared). `call_id` selects the MC substream.
[[nodiscard]] PesnStep pesn_step(const DiagonalGaussian& h, const DiagonalGaussian& z, const DiagonalGaussian& y_prev,
                                 const EsnWeights& w, const MomentEngine& engine, bool noise_variance_squared = false,
                                 std::uint64_t call_id = 0);

/// Output belief from b = [1; z; h] (constant has variance 0).
[[nodiscard]] DiagonalGaussian readout_belief(const DiagonalGaussian& z, const DiagonalGaussian& h,
                                              const Eigen::MatrixXd& w_out);

/// Initial hidden belief from cfg: mean per init_mean (drawn from rng), variance init_variance.
[[nodiscard]] DiagonalGaussian initial_belief(const PesnConfig& cfg, Eigen::Index n, const RngStream& rng);

/// Reservoir from rng.child(0), mean-only teacher-forced training from
/// h0 = mu0 (drawn from rng.child(1)). Returns weights with W_out set.
[[nodiscard]] EsnWeights pesn_train(const PesnConfig& cfg, EsnDims dims, const Dataset& data, const RngStream& rng);

using NextInputBelief = std::function<DiagonalGaussian(std::size_t k, const DiagonalGaussian& z,
                                                       const DiagonalGaussian& y_hat, const Dataset& data)>;

struct PesnPredictOptions {
  PredictMode mode = PredictMode::single;
  std::size_t start = 0;
  std::size_t washout = 0;
  std::size_t horizon = 1;
  bool rls = true;
  /// Variance of the data inputs handed to the network (per input column);
  /// empty means point masses.
  Eigen::VectorXd input_variance;
  NextInputBelief next_input;  ///< multi mode; null takes the next data row as a point mass
  bool record_washout = false;
};

struct PesnPredictResult {
  std::vector<DiagonalGaussian> outputs;      ///< per step
  std::vector<DiagonalGaussian> next_inputs;  ///< multi mode
  Eigen::MatrixXd errors;                     ///< mean - y(k), horizon x outputs
  std::vector<double> washout_hidden_means;
  DiagonalGaussian final_hidden;
};

/// Belief washout followed by `horizon` steps. Single mode feeds y(k) from the
/// data back with variance 0 and applies RLS on means; multi mode feeds the
/// output belief back with W_out frozen.
[[nodiscard]] PesnPredictResult pesn_predict(const EsnWeights& w, const PesnConfig& cfg, const Dataset& data,
                                             const DiagonalGaussian& h0, const PesnPredictOptions& options,
                                             const MomentEngine& engine);

}  // namespace pesn
