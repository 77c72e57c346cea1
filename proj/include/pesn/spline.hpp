#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pesn/activation.hpp"

namespace pesn {

/// Sorted mesh nodes on [a, b]; tau is the largest spacing.
struct Mesh {
  double a = -10.0;
  double b = 10.0;
  int n_points = 101;
  std::vector<double> nodes;
  double tau = 0.0;

  /// Evenly spaced nodes. Node i is ((n-1-i) a + i b)/(n-1), so a mesh
  /// symmetric about 0 is exactly antisymmetric in floating point.
  [[nodiscard]] static Mesh uniform(double a, double b, int n_points);

  [[nodiscard]] int segments() const { return n_points - 1; }
  /// Index of the segment containing z, clamped to [0, segments()-1].
  [[nodiscard]] int segment_of(double z) const;
};

/// Coefficients of one cubic piece in the local variable t = z - z_j:
/// c[0] + c[1] t + c[2] t^2 + c[3] t^3.
using CubicCoeffs = std::array<double, 4>;

enum class SplineEnd { natural, clamped };

struct CubicSpline {
  std::vector<double> nodes;
  std::vector<CubicCoeffs> pieces;

  [[nodiscard]] double operator()(double z) const;
};

/// Interpolating cubic spline through (nodes, values). Natural ends set the
/// second derivative to zero at both ends; clamped ends impose the given slopes.
[[nodiscard]] CubicSpline fit_cubic_spline(std::span<const double> nodes, std::span<const double> values,
                                           SplineEnd end = SplineEnd::natural, double slope_left = 0.0,
                                           double slope_right = 0.0);

/// Approximate sup |f''''| on [a, b]: 7-point central differences (step h)
/// evaluated at `probes` evenly spaced points. Overestimation only loosens
/// the spline bound.
[[nodiscard]] double fourth_derivative_sup(const std::function<double(double)>& f, double a, double b,
                                           int probes = 100001, double h = 0.05);

/// Precomputed spline interpolants of f, f^2, ..., f^max_power on a shared
/// mesh. Immutable after construction; safe to share across threads.
struct SplineTable {
  Activation activation;
  Mesh mesh;
  int max_power = 2;
  /// coeffs[p-1][j] interpolates f^p on segment j.
  std::array<std::vector<CubicCoeffs>, 4> coeffs;
  /// sup |(f^p)''''| on [a, b] for p = 1, 2.
  std::array<double, 2> fourth_derivative_sup{0.0, 0.0};

  [[nodiscard]] double eval(int power, double z) const;
};

[[nodiscard]] SplineTable build_spline_table(const Activation& activation, double a = -10.0, double b = 10.0,
                                             int n_points = 101, int max_power = 2);

/// Versioned text form: header, mesh, node list and one coefficient row per
/// segment and power, all at round-trip decimal precision.
[[nodiscard]] std::string to_text(const SplineTable& table);
[[nodiscard]] SplineTable spline_table_from_text(std::string_view text);

}  // namespace pesn
