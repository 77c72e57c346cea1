#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "pesn/activation.hpp"
#include "pesn/rng.hpp"
#include "pesn/spline.hpp"

namespace pesn {

/// Output moments of f(z) for Gaussian z. `variance` is clamped at 0;
/// `variance_deficit` records how far below 0 the unclamped value was.
/// Skewness and kurtosis (non-excess) are present only for order-4 requests.
struct MomentSet {
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> skewness;
  std::optional<double> kurtosis;
  double variance_deficit = 0.0;
};

// ---------------------------------------------------------------------------
// Analytic engine (tanh only)

/// Logistic-CDF moment matching: 2 / (1 + exp(-mu / sqrt(3 var / pi^2 + 1/4))) - 1.
[[nodiscard]] double analytic_tanh_mean(double mu, double var);

/// Gaussian-pdf approximation of 1 - tanh^2:
/// 1 - 2/sqrt(2 pi (2/pi + var)) exp(-mu^2 / (2 (2/pi + var))) - mean^2, clamped at 0.
[[nodiscard]] double analytic_tanh_variance(double mu, double var);

// ---------------------------------------------------------------------------
// Spline engine

/// A_p = tail terms + sum over segments of the closed-form Gaussian integrals
/// of the cubic pieces. order is 2 (mean, variance) or 4 (adds skewness and
/// kurtosis, needs max_power == 4). var == 0 returns f(mu) exactly.
///
/// Node quantities (one erfc and one exp per node) are shared by the two
/// segments meeting there and by every power.
[[nodiscard]] MomentSet spline_moments(const SplineTable& table, double mu, double var, int order = 2);

/// Straight-line version of spline_moments that calls segment_integral for
/// every (segment, power, k). Kept as the reference the fast path is checked
/// against.
[[nodiscard]] MomentSet spline_moments_reference(const SplineTable& table, double mu, double var, int order = 2);

/// Raw moments A_1..A_max_power (index p-1) of the spline surrogate.
[[nodiscard]] std::array<double, 4> spline_raw_moments(const SplineTable& table, double mu, double var);

/// Certified bound on |E f(z) - spline mean| for z ~ N(mu, var):
///   c1 (erf(B) - erf(A)) + c2 (erf(A) + 1) + c3 (1 - erf(B)),
/// A = (a - mu)/sqrt(2 var), B = (b - mu)/sqrt(2 var), c1 = tau^4 sup|f''''| / 32,
/// c2, c3 = half the gap between f and its tail model at a and b.
/// Empty for activations that are not C^4 (relu).
[[nodiscard]] std::optional<double> mean_error_bound(const SplineTable& table, double mu, double var);

/// eps_1 + 2 eps_mu, eps_1 being the same bound applied to the f^2 spline.
/// For unbounded activations (swish) the factor 2 becomes 2|mean| + eps_mu.
[[nodiscard]] std::optional<double> variance_error_bound(const SplineTable& table, double mu, double var);

/// Bound term for the f^power spline alone (power 1 or 2).
[[nodiscard]] std::optional<double> spline_power_bound(const SplineTable& table, int power, double mu, double var);

// ---------------------------------------------------------------------------
// Monte Carlo engine

struct McMoments {
  MomentSet moments;
  double mean_se = 0.0;      ///< standard error of the mean estimate
  double variance_se = 0.0;  ///< standard error of the variance estimate
};

/// Samples are drawn in chunks of 65536; chunk c uses rng.child(c) and chunks
/// are merged in index order, so results do not depend on thread count.
[[nodiscard]] McMoments mc_moments_detailed(const Activation& activation, double mu, double var, std::size_t n,
                                            const RngStream& rng, int order = 2);

[[nodiscard]] MomentSet mc_moments(const Activation& activation, double mu, double var, std::size_t n,
                                   const RngStream& rng, int order = 2);

// ---------------------------------------------------------------------------
// Dispatch

enum class Engine { mc, analytic, spline };

[[nodiscard]] Engine parse_engine(std::string_view name);
[[nodiscard]] std::string_view engine_name(Engine engine);

/// A configured moment engine. Cheap to copy; the spline table is shared.
class MomentEngine {
 public:
  [[nodiscard]] static MomentEngine analytic(const Activation& activation = Activation::make(ActivationId::tanh));
  [[nodiscard]] static MomentEngine spline(std::shared_ptr<const SplineTable> table);
  [[nodiscard]] static MomentEngine monte_carlo(const Activation& activation, std::size_t samples,
                                                const RngStream& rng);

  /// Moments of f(N(mu, var)). `task` selects the MC substream; ignored by the
  /// deterministic engines.
  [[nodiscard]] MomentSet operator()(double mu, double var, std::uint64_t task = 0) const;

  [[nodiscard]] Engine kind() const { return kind_; }
  [[nodiscard]] const Activation& activation() const { return activation_; }
  [[nodiscard]] const SplineTable* table() const { return table_.get(); }
  [[nodiscard]] std::size_t mc_samples() const { return mc_samples_; }
  [[nodiscard]] const RngStream& rng() const { return rng_; }

 private:
  Engine kind_ = Engine::analytic;
  Activation activation_ = Activation::make(ActivationId::tanh);
  std::shared_ptr<const SplineTable> table_;
  std::size_t mc_samples_ = 10000;
  RngStream rng_;
};

struct EngineOptions {
  std::shared_ptr<const SplineTable> table;  ///< built with defaults when null
  std::size_t mc_samples = 10000;
  RngStream rng;
  int order = 2;
};

/// One-shot dispatch. Analytic is only defined for tanh.
[[nodiscard]] MomentSet moments(Engine engine, const Activation& activation, double mu, double var,
                                const EngineOptions& options = {});

}  // namespace pesn
