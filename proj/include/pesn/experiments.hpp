#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pesn/activation.hpp"
#include "pesn/cartpole.hpp"
#include "pesn/config.hpp"
#include "pesn/pesn.hpp"
#include "pesn/stats.hpp"

namespace pesn {

inline constexpr const char* kVersion = "0.1.0";

/// Header plus rows of already formatted cells.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  [[nodiscard]] std::string to_csv() const;
};

/// Sidecar fields written next to every CSV.
struct RunInfo {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::string> extra;
};

/// Writes dir/name and dir/name.meta.json; returns the CSV path.
std::filesystem::path write_result(const std::filesystem::path& dir, const std::string& name, const CsvTable& table,
                                   const RunInfo& info);

[[nodiscard]] std::string cell(double v);

// ---------------------------------------------------------------------------
// Moment-error grid

struct MomentsGridConfig {
  ActivationId activation = ActivationId::tanh;
  std::vector<double> mus;   ///< default -5..5 step 0.5
  std::vector<double> vars{0.2, 1.0};
  std::size_t mc_samples = 10'000'000;
  double mesh_a = -10.0;
  double mesh_b = 10.0;
  int mesh_points = 101;
  bool higher_moments = true;
  std::uint64_t seed = 1;

  [[nodiscard]] static MomentsGridConfig from(const Config& cfg);
};

struct MomentsGridRow {
  double mu = 0.0;
  double var = 0.0;
  McMoments mc;
  std::optional<MomentSet> analytic;  ///< tanh only
  MomentSet spline;
  std::optional<double> eps_mu;
  std::optional<double> eps_sigma;
};

[[nodiscard]] std::vector<MomentsGridRow> run_moments_grid(const MomentsGridConfig& cfg);
[[nodiscard]] CsvTable moments_grid_table(const MomentsGridConfig& cfg, const std::vector<MomentsGridRow>& rows);

// ---------------------------------------------------------------------------
// Timing

struct TimingConfig {
  std::vector<std::size_t> sizes{100, 300, 1000, 3000, 10000};
  int repeats = 30;
  std::size_t mc_samples = 10000;
  int spline_points = 101;
  bool doubled_mesh = true;  ///< also time the spline engine with 2N-1 points
  std::uint64_t seed = 1;

  [[nodiscard]] static TimingConfig from(const Config& cfg);
};

struct TimingRow {
  std::string method;
  std::size_t size = 0;
  double median_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
};

struct TimingResult {
  std::vector<TimingRow> rows;
  double table_build_s = 0.0;  ///< spline table construction, reported separately
};

[[nodiscard]] TimingResult run_timing_bench(const TimingConfig& cfg);
[[nodiscard]] CsvTable timing_table(const TimingResult& result);

// ---------------------------------------------------------------------------
// Cart-pole experiments

/// Dataset, reservoir and prediction settings shared by the cart-pole runs.
struct CartPoleSetup {
  DatasetOptions data;
  CartPoleParams physics;
  PesnConfig pesn;
  InitMean belief_init = InitMean::zero;  ///< PESN prediction belief mean; variance pesn.init_variance
  std::uint64_t seed = 1;

  /// Reads dataset/reservoir keys; the experiment defaults are a slowly
  /// forgetting 100-unit reservoir (leak 0.1, radius 0.99, input scale 0.05).
  static CartPoleSetup from(const Config& cfg);
};

struct TrainedCartPole {
  Dataset data;
  EsnWeights weights;
  MomentEngine engine;
};

/// Dataset from data.seed, weights from pesn_train on rng(seed).child(0).
[[nodiscard]] TrainedCartPole prepare_cartpole(const CartPoleSetup& setup);

struct WashoutConfig {
  CartPoleSetup setup;
  std::vector<std::size_t> washouts{1, 10, 20, 30, 40, 50, 100, 200};
  std::size_t trials = 50;
  std::size_t horizon = 10;
  HistogramSpec histogram;

  [[nodiscard]] static WashoutConfig from(const Config& cfg);
};

/// Per washout length: absolute state error (x, theta, x_dot, omega averaged
/// over the horizon) of one PESN run and of each deterministic trial, and
/// the entropy of the hidden values visited during washout.
struct WashoutRow {
  std::size_t washout = 0;
  Eigen::Vector4d pesn_error = Eigen::Vector4d::Zero();
  Eigen::MatrixXd trial_error;  ///< trials x 4
  double pesn_entropy = 0.0;
  std::vector<double> trial_entropy;
};

[[nodiscard]] std::vector<WashoutRow> run_washout_study(const WashoutConfig& cfg);
[[nodiscard]] CsvTable washout_table(const std::vector<WashoutRow>& rows);
[[nodiscard]] CsvTable entropy_table(const std::vector<WashoutRow>& rows);

inline constexpr const char* kStateNames[4] = {"position", "angle", "velocity", "angular_velocity"};

struct ModelLearningConfig {
  CartPoleSetup setup;
  std::size_t trials = 200;
  std::size_t washout = 100;
  std::size_t single_horizon = 100;
  std::size_t multi_horizon = 20;
  double input_variance = 0.01;  ///< added to x, theta, x_dot, omega

  [[nodiscard]] static ModelLearningConfig from(const Config& cfg);
};

struct BandRecord {
  Eigen::MatrixXd truth;       ///< steps x outputs
  Eigen::MatrixXd pesn_mean;
  Eigen::MatrixXd pesn_var;
  Eigen::MatrixXd mc_mean;
  Eigen::MatrixXd mc_var;

  /// Step s is inside when every output's PESN mean lies within mc_mean +- 2 sd.
  [[nodiscard]] bool inside(Eigen::Index step) const;
};

struct ModelLearningResult {
  BandRecord single;
  BandRecord multi;
};

[[nodiscard]] ModelLearningResult run_model_learning(const ModelLearningConfig& cfg);
[[nodiscard]] CsvTable band_table(const BandRecord& band);

// ---------------------------------------------------------------------------
// Feed-forward propagation

struct FfnnConfig {
  int input_dim = 1024;
  int width = 5;
  int depth = 5;
  double input_mean = -0.5;
  double input_var = 0.01;
  std::size_t mc_samples = 50000;
  bool scale_weights = true;  ///< N(0,1) / sqrt(fan_in); raw N(0,1) when false
  double mesh_a = -10.0;
  double mesh_b = 10.0;
  int mesh_points = 101;
  std::uint64_t seed = 1;

  [[nodiscard]] static FfnnConfig from(const Config& cfg);
};

struct FfnnLayerError {
  int layer = 0;
  double analytic_eps_mu = 0.0;
  double analytic_eps_sigma = 0.0;
  double spline_eps_mu = 0.0;
  double spline_eps_sigma = 0.0;
};

struct FfnnResult {
  std::vector<FfnnLayerError> layers;  ///< hidden layers then the linear output layer
  std::vector<double> output_samples;  ///< sorted MC outputs
  Gaussian1D analytic_output;
  Gaussian1D spline_output;
};

/// Random tanh network input_dim -> width x depth -> 1 (linear output);
/// beliefs propagated with the analytic and spline engines and compared per
/// layer against MC forward passes. eps = mean over units of |engine - MC|.
[[nodiscard]] FfnnResult ffnn_propagate(const FfnnConfig& cfg);
[[nodiscard]] CsvTable ffnn_table(const FfnnResult& result);
/// Output CDF at 201 quantiles of the MC samples.
[[nodiscard]] CsvTable ffnn_cdf_table(const FfnnResult& result);

}  // namespace pesn
