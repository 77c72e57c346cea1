#pragma once

namespace pesn {

/// erf(b) - erf(a) for a <= b, evaluated through erfc when both arguments sit
/// in the same tail so that neither side loses digits to cancellation.
[[nodiscard]] double erf_diff(double a, double b);

/// Probability mass of N(mu, var) on [lo, hi]. Infinite endpoints allowed.
[[nodiscard]] double gaussian_mass(double lo, double hi, double mu, double var);

/// Partial raw moment of order k (0..3) of N(mu, var) over [lo, hi]:
///
///   (1 / sqrt(2 pi var)) * integral_lo^hi z^k exp(-(z - mu)^2 / (2 var)) dz
///
/// evaluated in closed form through alpha = (lo - mu)/sqrt(2 var) and
/// beta = (hi - mu)/sqrt(2 var). Infinite endpoints allowed; var must be > 0.
[[nodiscard]] double segment_integral(int k, double lo, double hi, double mu, double var);

/// Same quantity for k in 0..4 via the integration-by-parts recurrence
///   M_k = mu M_{k-1} + (k-1) var M_{k-2} + var (lo^{k-1} p(lo) - hi^{k-1} p(hi)).
/// Used for the z^4 tail term of relu/swish kurtosis.
[[nodiscard]] double gaussian_power_integral(int k, double lo, double hi, double mu, double var);

}  // namespace pesn
