#include "pesn/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pesn/errors.hpp"

namespace pesn {

DiagonalGaussian::DiagonalGaussian(Eigen::VectorXd mean, Eigen::VectorXd variance)
    : mean_(std::move(mean)), variance_(std::move(variance)) {
  if (mean_.size() != variance_.size()) {
    throw ShapeError("DiagonalGaussian: mean has " + std::to_string(mean_.size()) + " entries, variance has " +
                     std::to_string(variance_.size()));
  }
  for (Eigen::Index i = 0; i < variance_.size(); ++i) {
    if (!std::isfinite(mean_[i]) || !std::isfinite(variance_[i]) || variance_[i] < 0.0) {
      throw DomainError("DiagonalGaussian: component " + std::to_string(i) +
                        " has non-finite mean or negative/non-finite variance");
    }
  }
}

DiagonalGaussian DiagonalGaussian::point_mass(Eigen::VectorXd mean) {
  const Eigen::Index n = mean.size();
  return DiagonalGaussian(std::move(mean), Eigen::VectorXd::Zero(n));
}

DiagonalGaussian DiagonalGaussian::isotropic(Eigen::VectorXd mean, double variance) {
  const Eigen::Index n = mean.size();
  return DiagonalGaussian(std::move(mean), Eigen::VectorXd::Constant(n, variance));
}

DiagonalGaussian DiagonalGaussian::stack(const DiagonalGaussian& a, const DiagonalGaussian& b) {
  Eigen::VectorXd mean(a.size() + b.size());
  Eigen::VectorXd var(a.size() + b.size());
  mean << a.mean(), b.mean();
  var << a.variance(), b.variance();
  return DiagonalGaussian(std::move(mean), std::move(var));
}

DiagonalGaussian linear_transform(const DiagonalGaussian& x, const Eigen::MatrixXd& weights,
                                  const Eigen::VectorXd& bias) {
  if (weights.cols() != x.size() || bias.size() != weights.rows()) {
    throw ShapeError("linear_transform: W is " + std::to_string(weights.rows()) + "x" +
                     std::to_string(weights.cols()) + ", x has " + std::to_string(x.size()) + ", bias has " +
                     std::to_string(bias.size()));
  }
  Eigen::VectorXd mean = weights * x.mean() + bias;
  Eigen::VectorXd var = weights.cwiseAbs2() * x.variance();
  return DiagonalGaussian(std::move(mean), std::move(var));
}

GaussianProduct gaussian_product(Gaussian1D a, Gaussian1D b) {
  if (!(a.variance > 0.0) || !(b.variance > 0.0)) {
    throw DomainError("gaussian_product: variances must be strictly positive");
  }
  const double sum = a.variance + b.variance;
  const double diff = a.mean - b.mean;
  GaussianProduct out;
  out.scale = std::exp(-0.5 * diff * diff / sum) / std::sqrt(2.0 * std::numbers::pi * sum);
  // Written symmetrically so swapping a and b is bitwise commutative.
  out.product.variance = a.variance * b.variance / sum;
  out.product.mean = (a.mean * b.variance + b.mean * a.variance) / sum;
  return out;
}

Eigen::MatrixXd sample(const DiagonalGaussian& x, std::size_t n, const RngStream& rng) {
  if (n == 0) {
    throw ShapeError("sample: n must be >= 1");
  }
  const Eigen::Index d = x.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd sd = x.variance().cwiseSqrt();
  NormalGenerator gen(rng);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out(i, j) = x.mean()[j] + sd[j] * gen.normal();
    }
  }
  return out;
}

}  // namespace pesn
