#include "pesn/gaussian_integrals.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pesn/errors.hpp"

namespace pesn {

namespace {

constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;

void check_args(double lo, double hi, double var) {
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw DomainError("gaussian integral: variance must be finite and > 0");
  }
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw DomainError("gaussian integral: need lo <= hi");
  }
}

// exp(-x^2) * x^power with the infinite-argument limit 0.
double gauss_weight(double x, int power) {
  if (!std::isfinite(x) || std::abs(x) > 40.0) {
    return 0.0;
  }
  double out = std::exp(-x * x);
  for (int i = 0; i < power; ++i) {
    out *= x;
  }
  return out;
}

}  // namespace

double erf_diff(double a, double b) {
  if (a >= 0.0) {
    return std::erfc(a) - std::erfc(b);
  }
  if (b <= 0.0) {
    return std::erfc(-b) - std::erfc(-a);
  }
  return std::erf(b) - std::erf(a);
}

double gaussian_mass(double lo, double hi, double mu, double var) {
  check_args(lo, hi, var);
  const double s = std::sqrt(2.0 * var);
  return 0.5 * erf_diff((lo - mu) / s, (hi - mu) / s);
}

double segment_integral(int k, double lo, double hi, double mu, double var) {
  check_args(lo, hi, var);
  if (k < 0 || k > 3) {
    throw DomainError("segment_integral: k must be in 0..3, got " + std::to_string(k));
  }
  const double s = std::sqrt(2.0 * var);
  const double alpha = (lo - mu) / s;
  const double beta = (hi - mu) / s;
  const double d = erf_diff(alpha, beta);
  const double e_a = gauss_weight(alpha, 0);
  const double e_b = gauss_weight(beta, 0);
  const double de = e_a - e_b;
  switch (k) {
    case 0:
      return 0.5 * d;
    case 1:
      return std::sqrt(var / (2.0 * std::numbers::pi)) * de + 0.5 * mu * d;
    case 2: {
      const double xe = gauss_weight(alpha, 1) - gauss_weight(beta, 1);
      return 0.5 * var * (d + 2.0 * kInvSqrtPi * xe) + mu * std::sqrt(2.0 * var / std::numbers::pi) * de +
             0.5 * mu * mu * d;
    }
    default: {
      const double xe = gauss_weight(alpha, 1) - gauss_weight(beta, 1);
      const double x2e = (e_a + gauss_weight(alpha, 2)) - (e_b + gauss_weight(beta, 2));
      return std::sqrt(2.0 * var * var * var / std::numbers::pi) * x2e +
             1.5 * var * mu * kInvSqrtPi * (std::sqrt(std::numbers::pi) * d + 2.0 * xe) +
             3.0 * mu * mu * std::sqrt(var / (2.0 * std::numbers::pi)) * de + 0.5 * mu * mu * mu * d;
    }
  }
}

double gaussian_power_integral(int k, double lo, double hi, double mu, double var) {
  check_args(lo, hi, var);
  if (k < 0 || k > 4) {
    throw DomainError("gaussian_power_integral: k must be in 0..4");
  }
  const double sd = std::sqrt(var);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
  // lo^j p(lo) and hi^j p(hi); zero at infinite endpoints.
  auto boundary = [&](double x, int j) {
    if (!std::isfinite(x) || std::abs(x - mu) > 40.0 * sd) {
      return 0.0;
    }
    const double t = (x - mu) / sd;
    return std::pow(x, j) * norm * std::exp(-0.5 * t * t);
  };
  double m_prev2 = 0.0;
  double m_prev = gaussian_mass(lo, hi, mu, var);
  if (k == 0) {
    return m_prev;
  }
  for (int j = 1; j <= k; ++j) {
    const double m = mu * m_prev + (j - 1) * var * m_prev2 + var * (boundary(lo, j - 1) - boundary(hi, j - 1));
    m_prev2 = m_prev;
    m_prev = m;
  }
  return m_prev;
}

}  // namespace pesn
