#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include <Eigen/Dense>

namespace pesn {

/// Aligned network inputs z(k) and targets y(k), one row per timestep.
/// Rows [0, washout) are burn-in, [washout, train_end) train and
/// [train_end, rows) test.
struct Dataset {
  Eigen::MatrixXd z;
  Eigen::MatrixXd y;
  std::size_t washout = 0;
  std::size_t train_end = 0;
  std::map<std::string, std::string> metadata;

  [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(z.rows()); }
  [[nodiscard]] Eigen::Index input_dim() const { return z.cols(); }
  [[nodiscard]] Eigen::Index output_dim() const { return y.cols(); }

  /// Throws ShapeError on mismatched row counts, DomainError on bad splits.
  void validate() const;
};

/// CSV with header z0..z{n-1},y0..y{m-1}; doubles at round-trip precision.
[[nodiscard]] std::string dataset_to_csv(const Dataset& data);
[[nodiscard]] Dataset dataset_from_csv(std::string_view text);

/// Writes `path` and the JSON sidecar `path`.meta.json (splits + metadata).
void save_dataset(const Dataset& data, const std::filesystem::path& path);
/// Reads a CSV and its sidecar when present. Without a sidecar the splits
/// default to washout 0 and train_end = rows.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& path);

[[nodiscard]] std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace pesn
