#include "pesn/spline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "pesn/errors.hpp"
#include "pesn/text.hpp"

namespace pesn {

Mesh Mesh::uniform(double a, double b, int n_points) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("Mesh: need finite a < b");
  }
  if (n_points < 4) {
    throw DomainError("Mesh: need at least 4 points");
  }
  Mesh mesh;
  mesh.a = a;
  mesh.b = b;
  mesh.n_points = n_points;
  mesh.nodes.resize(static_cast<std::size_t>(n_points));
  const double denom = static_cast<double>(n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    mesh.nodes[static_cast<std::size_t>(i)] = (static_cast<double>(n_points - 1 - i) * a + static_cast<double>(i) * b) / denom;
  }
  mesh.nodes.front() = a;
  mesh.nodes.back() = b;
  mesh.tau = 0.0;
  for (int i = 0; i + 1 < n_points; ++i) {
    mesh.tau = std::max(mesh.tau, mesh.nodes[static_cast<std::size_t>(i) + 1] - mesh.nodes[static_cast<std::size_t>(i)]);
  }
  return mesh;
}

int Mesh::segment_of(double z) const {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), z);
  int j = static_cast<int>(it - nodes.begin()) - 1;
  return std::clamp(j, 0, segments() - 1);
}

double CubicSpline::operator()(double z) const {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), z);
  int j = std::clamp(static_cast<int>(it - nodes.begin()) - 1, 0, static_cast<int>(pieces.size()) - 1);
  const auto& c = pieces[static_cast<std::size_t>(j)];
  const double t = z - nodes[static_cast<std::size_t>(j)];
  return c[0] + t * (c[1] + t * (c[2] + t * c[3]));
}

CubicSpline fit_cubic_spline(std::span<const double> nodes, std::span<const double> values, SplineEnd end,
                             double slope_left, double slope_right) {
  const std::size_t n = nodes.size();
  if (n < 2 || values.size() != n) {
    throw ShapeError("fit_cubic_spline: need >= 2 nodes and one value per node");
  }
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = nodes[i + 1] - nodes[i];
    if (!(h[i] > 0.0)) {
      throw DomainError("fit_cubic_spline: nodes must be strictly increasing");
    }
  }

  // Tridiagonal system for the second derivatives m_i.
  std::vector<double> lower(n, 0.0), diag(n, 1.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    lower[i] = h[i - 1];
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    upper[i] = h[i];
    rhs[i] = 6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
  }
  if (end == SplineEnd::clamped) {
    diag[0] = 2.0 * h[0];
    upper[0] = h[0];
    rhs[0] = 6.0 * ((values[1] - values[0]) / h[0] - slope_left);
    lower[n - 1] = h[n - 2];
    diag[n - 1] = 2.0 * h[n - 2];
    rhs[n - 1] = 6.0 * (slope_right - (values[n - 1] - values[n - 2]) / h[n - 2]);
  }

  // Thomas algorithm.
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> m(n);
  m[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
  }

  CubicSpline spline;
  spline.nodes.assign(nodes.begin(), nodes.end());
  spline.pieces.resize(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double hj = h[j];
    spline.pieces[j] = {values[j], (values[j + 1] - values[j]) / hj - hj * (2.0 * m[j] + m[j + 1]) / 6.0,
                        0.5 * m[j], (m[j + 1] - m[j]) / (6.0 * hj)};
  }
  return spline;
}

double fourth_derivative_sup(const std::function<double(double)>& f, double a, double b, int probes, double h) {
  if (probes < 2 || !(h > 0.0)) {
    throw DomainError("fourth_derivative_sup: need probes >= 2 and h > 0");
  }
  static constexpr std::array<double, 7> kStencil{-1.0 / 6.0, 2.0, -13.0 / 2.0, 28.0 / 3.0, -13.0 / 2.0, 2.0,
                                                  -1.0 / 6.0};
  const double h4 = h * h * h * h;
  double sup = 0.0;
  for (int i = 0; i < probes; ++i) {
    const double z = a + (b - a) * static_cast<double>(i) / static_cast<double>(probes - 1);
    double acc = 0.0;
    for (int k = 0; k < 7; ++k) {
      acc += kStencil[static_cast<std::size_t>(k)] * f(z + static_cast<double>(k - 3) * h);
    }
    sup = std::max(sup, std::abs(acc / h4));
  }
  return sup;
}

double SplineTable::eval(int power, double z) const {
  if (power < 1 || power > max_power) {
    throw DomainError("SplineTable::eval: power out of range");
  }
  const int j = mesh.segment_of(z);
  const auto& c = coeffs[static_cast<std::size_t>(power - 1)][static_cast<std::size_t>(j)];
  const double t = z - mesh.nodes[static_cast<std::size_t>(j)];
  return c[0] + t * (c[1] + t * (c[2] + t * c[3]));
}

SplineTable build_spline_table(const Activation& activation, double a, double b, int n_points, int max_power) {
  if (max_power < 1 || max_power > 4) {
    throw DomainError("build_spline_table: max_power must be in 1..4");
  }
  SplineTable table;
  table.activation = activation;
  table.mesh = Mesh::uniform(a, b, n_points);
  table.max_power = max_power;

  std::vector<double> f(table.mesh.nodes.size());
  std::transform(table.mesh.nodes.begin(), table.mesh.nodes.end(), f.begin(), [&](double z) { return activation(z); });
  std::vector<double> fp(f.size(), 1.0);
  for (int p = 1; p <= max_power; ++p) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      fp[i] *= f[i];
    }
    table.coeffs[static_cast<std::size_t>(p - 1)] = fit_cubic_spline(table.mesh.nodes, fp).pieces;
  }

  if (activation.smooth()) {
    table.fourth_derivative_sup[0] = fourth_derivative_sup([&](double z) { return activation(z); }, a, b);
    table.fourth_derivative_sup[1] = fourth_derivative_sup(
        [&](double z) {
          const double v = activation(z);
          return v * v;
        },
        a, b);
  }
  return table;
}

std::string to_text(const SplineTable& table) {
  std::ostringstream out;
  out << "pesn-spline-table v1\n";
  out << "activation " << table.activation.name() << "\n";
  out << "mesh " << format_double(table.mesh.a) << " " << format_double(table.mesh.b) << " "
      << table.mesh.n_points << "\n";
  out << "max_power " << table.max_power << "\n";
  out << "fourth_derivative_sup " << format_double(table.fourth_derivative_sup[0]) << " "
      << format_double(table.fourth_derivative_sup[1]) << "\n";
  out << "nodes\n";
  for (double z : table.mesh.nodes) {
    out << format_double(z) << "\n";
  }
  for (int p = 1; p <= table.max_power; ++p) {
    out << "coeffs " << p << "\n";
    for (const auto& c : table.coeffs[static_cast<std::size_t>(p - 1)]) {
      out << format_double(c[0]) << " " << format_double(c[1]) << " " << format_double(c[2]) << " "
          << format_double(c[3]) << "\n";
    }
  }
  return out.str();
}

SplineTable spline_table_from_text(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (!line.empty()) {
      lines.push_back(line);
    }
  }
  std::size_t pos = 0;
  auto next = [&]() -> std::vector<std::string_view> {
    if (pos >= lines.size()) {
      throw ConfigError("spline table: unexpected end of input");
    }
    return split_ws(lines[pos++]);
  };
  auto expect = [](const std::vector<std::string_view>& tok, std::string_view key, std::size_t count) {
    if (tok.empty() || tok[0] != key || tok.size() != count) {
      throw ConfigError("spline table: malformed '" + std::string(key) + "' line");
    }
  };

  auto header = next();
  if (header.size() != 2 || header[0] != "pesn-spline-table" || header[1] != "v1") {
    throw ConfigError("spline table: unsupported header");
  }
  SplineTable table;
  auto tok = next();
  expect(tok, "activation", 2);
  table.activation = Activation::make(parse_activation(tok[1]));
  tok = next();
  expect(tok, "mesh", 4);
  const double a = parse_double(tok[1]);
  const double b = parse_double(tok[2]);
  const int n_points = static_cast<int>(parse_int(tok[3]));
  table.mesh = Mesh::uniform(a, b, n_points);
  tok = next();
  expect(tok, "max_power", 2);
  table.max_power = static_cast<int>(parse_int(tok[1]));
  if (table.max_power < 1 || table.max_power > 4) {
    throw ConfigError("spline table: max_power out of range");
  }
  tok = next();
  expect(tok, "fourth_derivative_sup", 3);
  table.fourth_derivative_sup = {parse_double(tok[1]), parse_double(tok[2])};
  tok = next();
  expect(tok, "nodes", 1);
  for (int i = 0; i < n_points; ++i) {
    auto t = next();
    if (t.size() != 1) {
      throw ConfigError("spline table: malformed node row");
    }
    table.mesh.nodes[static_cast<std::size_t>(i)] = parse_double(t[0]);
  }
  for (int p = 1; p <= table.max_power; ++p) {
    tok = next();
    expect(tok, "coeffs", 2);
    if (parse_int(tok[1]) != p) {
      throw ConfigError("spline table: coefficient blocks out of order");
    }
    auto& rows = table.coeffs[static_cast<std::size_t>(p - 1)];
    rows.resize(static_cast<std::size_t>(n_points - 1));
    for (auto& row : rows) {
      auto t = next();
      if (t.size() != 4) {
        throw ConfigError("spline table: coefficient rows need 4 entries");
      }
      for (std::size_t k = 0; k < 4; ++k) {
        row[k] = parse_double(t[k]);
      }
    }
  }
  return table;
}

}  // namespace pesn
