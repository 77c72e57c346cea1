#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "pesn/rng.hpp"

namespace pesn {

/// Scalar Gaussian. `variance` is a variance, never a standard deviation.
struct Gaussian1D {
  double mean = 0.0;
  double variance = 0.0;
};

/// Gaussian vector with diagonal covariance; the uncertainty currency of the
/// library. Zero variance (point mass) is legal in every component.
class DiagonalGaussian {
 public:
  DiagonalGaussian() = default;
  DiagonalGaussian(Eigen::VectorXd mean, Eigen::VectorXd variance);

  static DiagonalGaussian point_mass(Eigen::VectorXd mean);
  static DiagonalGaussian isotropic(Eigen::VectorXd mean, double variance);

  [[nodiscard]] Eigen::Index size() const { return mean_.size(); }
  [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
  [[nodiscard]] const Eigen::VectorXd& variance() const { return variance_; }
  [[nodiscard]] Gaussian1D operator[](Eigen::Index i) const { return {mean_[i], variance_[i]}; }

  /// Concatenation [a; b] with zero cross-covariance.
  [[nodiscard]] static DiagonalGaussian stack(const DiagonalGaussian& a, const DiagonalGaussian& b);

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd variance_;
};

/// Affine map of a diagonal Gaussian. Returns the exact mean and the diagonal
/// of W diag(var) W^T; off-diagonal output covariance is dropped.
[[nodiscard]] DiagonalGaussian linear_transform(const DiagonalGaussian& x, const Eigen::MatrixXd& weights,
                                                const Eigen::VectorXd& bias);

struct GaussianProduct {
  double scale = 0.0;  ///< normalizing constant: N(mu_a; mu_b, var_a + var_b)
  Gaussian1D product;
};

/// N(x; a) * N(x; b) = scale * N(x; product). Both variances must be > 0.
[[nodiscard]] GaussianProduct gaussian_product(Gaussian1D a, Gaussian1D b);

/// n x d matrix of i.i.d. draws from x.
[[nodiscard]] Eigen::MatrixXd sample(const DiagonalGaussian& x, std::size_t n, const RngStream& rng);

}  // namespace pesn
