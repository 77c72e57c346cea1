#include "pesn/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pesn/errors.hpp"
#include "pesn/gaussian_integrals.hpp"

namespace pesn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonnegative_var(double var, const char* who) {
  if (!(var >= 0.0) || !std::isfinite(var)) {
    throw DomainError(std::string(who) + ": variance must be finite and >= 0");
  }
}

void require_positive_var(double var, const char* who) {
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw DomainError(std::string(who) + ": variance must be finite and > 0");
  }
}

MomentSet point_mass_moments(double value, int order) {
  MomentSet out;
  out.mean = value;
  out.variance = 0.0;
  if (order == 4) {
    out.skewness = 0.0;
    out.kurtosis = 3.0;
  }
  return out;
}

MomentSet from_raw(const std::array<double, 4>& raw, int order) {
  MomentSet out;
  const double a1 = raw[0];
  const double var = raw[1] - a1 * a1;
  out.mean = a1;
  out.variance = std::max(0.0, var);
  out.variance_deficit = std::max(0.0, -var);
  if (order == 4) {
    if (out.variance > 0.0) {
      const double s = out.variance;
      out.skewness = (raw[2] - 3.0 * a1 * s - a1 * a1 * a1) / std::pow(s, 1.5);
      out.kurtosis = (raw[3] - 4.0 * a1 * raw[2] + 6.0 * a1 * a1 * raw[1] - 3.0 * a1 * a1 * a1 * a1) / (s * s);
    } else {
      out.skewness = kNaN;
      out.kurtosis = kNaN;
    }
  }
  return out;
}

void check_order(const SplineTable& table, int order) {
  if (order != 2 && order != 4) {
    throw DomainError("spline_moments: order must be 2 or 4");
  }
  if (table.max_power < order) {
    throw DomainError("spline_moments: table max_power " + std::to_string(table.max_power) +
                      " is too small for order " + std::to_string(order));
  }
}

// Integral of (tail model)^p against N(mu, var) over [lo, hi] (one side infinite).
double tail_contribution(const Tail& tail, int power, double lo, double hi, double mu, double var) {
  if (tail.kind == Tail::Kind::constant) {
    const double c = tail.power_at(0.0, power);
    return c == 0.0 ? 0.0 : c * gaussian_mass(lo, hi, mu, var);
  }
  if (power <= 3) {
    return segment_integral(power, lo, hi, mu, var);
  }
  return gaussian_power_integral(power, lo, hi, mu, var);
}

void add_tails(const SplineTable& table, double mu, double var, std::array<double, 4>& raw) {
  for (int p = 1; p <= table.max_power; ++p) {
    raw[static_cast<std::size_t>(p - 1)] += tail_contribution(table.activation.left, p, -kInf, table.mesh.a, mu, var) +
                                            tail_contribution(table.activation.right, p, table.mesh.b, kInf, mu, var);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double analytic_tanh_mean(double mu, double var) {
  require_nonnegative_var(var, "analytic_tanh_mean");
  const double scale = std::sqrt(3.0 * var / (std::numbers::pi * std::numbers::pi) + 0.25);
  return 2.0 / (1.0 + std::exp(-mu / scale)) - 1.0;
}

double analytic_tanh_variance(double mu, double var) {
  require_nonnegative_var(var, "analytic_tanh_variance");
  const double spread = 2.0 / std::numbers::pi + var;
  const double m = analytic_tanh_mean(mu, var);
  const double v = 1.0 - 2.0 / std::sqrt(2.0 * std::numbers::pi * spread) * std::exp(-mu * mu / (2.0 * spread)) - m * m;
  return std::max(0.0, v);
}

// ---------------------------------------------------------------------------

std::array<double, 4> spline_raw_moments(const SplineTable& table, double mu, double var) {
  require_positive_var(var, "spline_raw_moments");
  const auto& nodes = table.mesh.nodes;
  const std::size_t n = nodes.size();
  const double s = std::sqrt(2.0 * var);
  const double pdf_norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);

  // Per-node erfc(|x|) and Gaussian density, x = (z - mu)/sqrt(2 var).
  std::vector<double> x(n), ec(n), pdf(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = (nodes[j] - mu) / s;
    ec[j] = std::erfc(std::abs(x[j]));
    pdf[j] = pdf_norm * std::exp(-x[j] * x[j]);
  }

  std::array<double, 4> raw{0.0, 0.0, 0.0, 0.0};
  const int powers = table.max_power;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double d;
    if (x[j] >= 0.0) {
      d = ec[j] - ec[j + 1];
    } else if (x[j + 1] <= 0.0) {
      d = ec[j + 1] - ec[j];
    } else {
      d = 2.0 - ec[j] - ec[j + 1];
    }
    if (d == 0.0 && pdf[j] == 0.0 && pdf[j + 1] == 0.0) {
      continue;
    }
    // Partial moments of t = z - z_j over [0, h] by integration by parts.
    const double h = nodes[j + 1] - nodes[j];
    const double m = mu - nodes[j];
    const double m0 = 0.5 * d;
    const double m1 = m * m0 + var * (pdf[j] - pdf[j + 1]);
    const double m2 = m * m1 + var * m0 - var * h * pdf[j + 1];
    const double m3 = m * m2 + 2.0 * var * m1 - var * h * h * pdf[j + 1];
    for (int p = 0; p < powers; ++p) {
      const auto& c = table.coeffs[static_cast<std::size_t>(p)][j];
      raw[static_cast<std::size_t>(p)] += c[0] * m0 + c[1] * m1 + c[2] * m2 + c[3] * m3;
    }
  }
  add_tails(table, mu, var, raw);
  return raw;
}

MomentSet spline_moments(const SplineTable& table, double mu, double var, int order) {
  require_nonnegative_var(var, "spline_moments");
  check_order(table, order);
  if (var == 0.0) {
    return point_mass_moments(table.activation(mu), order);
  }
  return from_raw(spline_raw_moments(table, mu, var), order);
}

MomentSet spline_moments_reference(const SplineTable& table, double mu, double var, int order) {
  require_nonnegative_var(var, "spline_moments_reference");
  check_order(table, order);
  if (var == 0.0) {
    return point_mass_moments(table.activation(mu), order);
  }
  std::array<double, 4> raw{0.0, 0.0, 0.0, 0.0};
  const auto& nodes = table.mesh.nodes;
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    const double h = nodes[j + 1] - nodes[j];
    const double shifted_mu = mu - nodes[j];
    for (int p = 0; p < table.max_power; ++p) {
      const auto& c = table.coeffs[static_cast<std::size_t>(p)][j];
      for (int k = 0; k < 4; ++k) {
        raw[static_cast<std::size_t>(p)] += c[static_cast<std::size_t>(k)] * segment_integral(k, 0.0, h, shifted_mu, var);
      }
    }
  }
  add_tails(table, mu, var, raw);
  return from_raw(raw, order);
}

std::optional<double> spline_power_bound(const SplineTable& table, int power, double mu, double var) {
  require_positive_var(var, "spline error bound");
  if (power < 1 || power > 2 || power > table.max_power) {
    throw DomainError("spline error bound: power must be 1 or 2 and present in the table");
  }
  if (!table.activation.smooth()) {
    return std::nullopt;
  }
  const double a = table.mesh.a;
  const double b = table.mesh.b;
  const double s = std::sqrt(2.0 * var);
  const double lo = (a - mu) / s;
  const double hi = (b - mu) / s;
  const double tau4 = std::pow(table.mesh.tau, 4);
  const double c1 = tau4 * table.fourth_derivative_sup[static_cast<std::size_t>(power - 1)] / 32.0;
  const double fa = std::pow(table.activation(a), power);
  const double fb = std::pow(table.activation(b), power);
  const double c2 = std::abs(fa - table.activation.left.power_at(a, power)) / 2.0;
  const double c3 = std::abs(fb - table.activation.right.power_at(b, power)) / 2.0;
  // erf(lo) + 1 = erfc(-lo); 1 - erf(hi) = erfc(hi).
  return c1 * erf_diff(lo, hi) + c2 * std::erfc(-lo) + c3 * std::erfc(hi);
}

std::optional<double> mean_error_bound(const SplineTable& table, double mu, double var) {
  return spline_power_bound(table, 1, mu, var);
}

std::optional<double> variance_error_bound(const SplineTable& table, double mu, double var) {
  const auto eps_mu = spline_power_bound(table, 1, mu, var);
  const auto eps_1 = spline_power_bound(table, 2, mu, var);
  if (!eps_mu || !eps_1) {
    return std::nullopt;
  }
  double factor = 2.0;
  if (table.activation.right.kind == Tail::Kind::linear || table.activation.left.kind == Tail::Kind::linear) {
    const double mean = spline_moments(table, mu, var).mean;
    factor = std::max(2.0, 2.0 * std::abs(mean) + *eps_mu);
  }
  return *eps_1 + factor * *eps_mu;
}

// ---------------------------------------------------------------------------

namespace {

// Streaming central moments up to order 4 (Pebay's single-pass update).
struct RunningMoments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;

  void push(double x) {
    const double n1 = n;
    n += 1.0;
    const double delta = x - mean;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean += delta_n;
    m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
    m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2;
    m2 += term1;
  }

  void merge(const RunningMoments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double na = n;
    const double nb = o.n;
    const double nt = na + nb;
    const double delta = o.mean - mean;
    const double d2 = delta * delta;
    const double d3 = d2 * delta;
    const double d4 = d2 * d2;
    const double new_m4 = m4 + o.m4 + d4 * na * nb * (na * na - na * nb + nb * nb) / (nt * nt * nt) +
                          6.0 * d2 * (na * na * o.m2 + nb * nb * m2) / (nt * nt) +
                          4.0 * delta * (na * o.m3 - nb * m3) / nt;
    const double new_m3 = m3 + o.m3 + d3 * na * nb * (na - nb) / (nt * nt) + 3.0 * delta * (na * o.m2 - nb * m2) / nt;
    m2 += o.m2 + d2 * na * nb / nt;
    mean += delta * nb / nt;
    m3 = new_m3;
    m4 = new_m4;
    n = nt;
  }
};

// Sums shifted by a value near the mean; no per-sample division.
struct ShiftedSums {
  double shift = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;

  void push(double x) {
    const double d = x - shift;
    s1 += d;
    s2 += d * d;
  }
};

constexpr std::size_t kChunk = 1u << 16;

}  // namespace

McMoments mc_moments_detailed(const Activation& activation, double mu, double var, std::size_t n,
                              const RngStream& rng, int order) {
  require_nonnegative_var(var, "mc_moments");
  if (n < 2) {
    throw DomainError("mc_moments: need n >= 2");
  }
  if (order != 2 && order != 4) {
    throw DomainError("mc_moments: order must be 2 or 4");
  }
  McMoments out;
  if (var == 0.0) {
    out.moments = point_mass_moments(activation(mu), order);
    return out;
  }
  const double sd = std::sqrt(var);
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<RunningMoments> parts(chunks);
  const auto chunk_count = static_cast<long long>(chunks);

#pragma omp parallel for schedule(static) if (chunks > 1)
  for (long long c = 0; c < chunk_count; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const std::size_t begin = ci * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    NormalGenerator gen(rng.child(ci));
    RunningMoments acc;
    for (std::size_t i = begin; i < end; ++i) {
      acc.push(activation(mu + sd * gen.normal()));
    }
    parts[ci] = acc;
  }
  RunningMoments total;
  for (const auto& part : parts) {
    total.merge(part);
  }

  const double nn = total.n;
  const double pop_var = total.m2 / nn;
  out.moments.mean = total.mean;
  out.moments.variance = total.m2 / (nn - 1.0);
  if (order == 4) {
    if (pop_var > 0.0) {
      out.moments.skewness = (total.m3 / nn) / std::pow(pop_var, 1.5);
      out.moments.kurtosis = (total.m4 / nn) / (pop_var * pop_var);
    } else {
      out.moments.skewness = kNaN;
      out.moments.kurtosis = kNaN;
    }
  }
  out.mean_se = std::sqrt(out.moments.variance / nn);
  out.variance_se = std::sqrt(std::max(0.0, total.m4 / nn - pop_var * pop_var) / nn);
  return out;
}

MomentSet mc_moments(const Activation& activation, double mu, double var, std::size_t n, const RngStream& rng,
                     int order) {
  if (order == 4 || n > kChunk) {
    return mc_moments_detailed(activation, mu, var, n, rng, order).moments;
  }
  require_nonnegative_var(var, "mc_moments");
  if (n < 2) {
    throw DomainError("mc_moments: need n >= 2");
  }
  if (order != 2) {
    throw DomainError("mc_moments: order must be 2 or 4");
  }
  if (var == 0.0) {
    return point_mass_moments(activation(mu), order);
  }
  // Single chunk: same stream layout as the detailed path (chunk 0).
  const double sd = std::sqrt(var);
  NormalGenerator gen(rng.child(0));
  ShiftedSums acc{activation(mu)};
  for (std::size_t i = 0; i < n; ++i) {
    acc.push(activation(mu + sd * gen.normal()));
  }
  const auto nn = static_cast<double>(n);
  MomentSet out;
  out.mean = acc.shift + acc.s1 / nn;
  out.variance = std::max(0.0, (acc.s2 - acc.s1 * acc.s1 / nn) / (nn - 1.0));
  return out;
}

// ---------------------------------------------------------------------------

Engine parse_engine(std::string_view name) {
  if (name == "mc") return Engine::mc;
  if (name == "analytic") return Engine::analytic;
  if (name == "spline") return Engine::spline;
  throw ConfigError("unknown engine '" + std::string(name) + "' (expected analytic, spline or mc)");
}

std::string_view engine_name(Engine engine) {
  switch (engine) {
    case Engine::mc:
      return "mc";
    case Engine::analytic:
      return "analytic";
    case Engine::spline:
      return "spline";
  }
  return "?";
}

MomentEngine MomentEngine::analytic(const Activation& activation) {
  if (activation.id != ActivationId::tanh) {
    throw UnsupportedError("analytic engine is only defined for tanh");
  }
  MomentEngine e;
  e.kind_ = Engine::analytic;
  e.activation_ = activation;
  return e;
}

MomentEngine MomentEngine::spline(std::shared_ptr<const SplineTable> table) {
  if (!table) {
    throw DomainError("spline engine needs a table");
  }
  MomentEngine e;
  e.kind_ = Engine::spline;
  e.activation_ = table->activation;
  e.table_ = std::move(table);
  return e;
}

MomentEngine MomentEngine::monte_carlo(const Activation& activation, std::size_t samples, const RngStream& rng) {
  if (samples < 2) {
    throw DomainError("mc engine needs at least 2 samples");
  }
  MomentEngine e;
  e.kind_ = Engine::mc;
  e.activation_ = activation;
  e.mc_samples_ = samples;
  e.rng_ = rng;
  return e;
}

MomentSet MomentEngine::operator()(double mu, double var, std::uint64_t task) const {
  switch (kind_) {
    case Engine::analytic: {
      MomentSet out;
      out.mean = analytic_tanh_mean(mu, var);
      out.variance = analytic_tanh_variance(mu, var);
      return out;
    }
    case Engine::spline:
      return spline_moments(*table_, mu, var);
    case Engine::mc:
      return mc_moments(activation_, mu, var, mc_samples_, rng_.child(task));
  }
  return {};
}

MomentSet moments(Engine engine, const Activation& activation, double mu, double var, const EngineOptions& options) {
  switch (engine) {
    case Engine::analytic: {
      if (activation.id != ActivationId::tanh) {
        throw UnsupportedError("analytic engine is only defined for tanh, got " + std::string(activation.name()));
      }
      MomentSet out;
      out.mean = analytic_tanh_mean(mu, var);
      out.variance = analytic_tanh_variance(mu, var);
      return out;
    }
    case Engine::spline: {
      if (options.table) {
        if (options.table->activation.id != activation.id) {
          throw DomainError("spline table was built for a different activation");
        }
        return spline_moments(*options.table, mu, var, options.order);
      }
      const auto table = build_spline_table(activation, -10.0, 10.0, 101, options.order);
      return spline_moments(table, mu, var, options.order);
    }
    case Engine::mc:
      return mc_moments(activation, mu, var, options.mc_samples, options.rng, options.order);
  }
  return {};
}

}  // namespace pesn
