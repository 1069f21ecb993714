#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "evimmd/model.hpp"

namespace evimmd {

/// Finite mixture of multivariate normals.
class GaussianMixture {
 public:
  /// Weights must be non-negative and sum to one within 1e-12; every
  /// covariance must be symmetric positive definite.
  GaussianMixture(std::vector<double> weights, std::vector<Vector> means,
                  std::vector<Eigen::MatrixXd> covariances);

  std::size_t dim() const { return dim_; }
  std::size_t components() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vector>& means() const { return means_; }
  const std::vector<Eigen::MatrixXd>& covariances() const { return covariances_; }

  double density(const Eigen::Ref<const Vector>& x) const;
  Vector grad_density(const Eigen::Ref<const Vector>& x) const;
  /// Computed through log-sum-exp, so it stays finite far in the tails.
  Vector grad_log_density(const Eigen::Ref<const Vector>& x) const;
  void evaluate(const Matrix& points, Vector& values, Matrix* gradients) const;
  Vector sample(Rng& rng) const;

 private:
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<Vector> means_;
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<Eigen::MatrixXd> precisions_;
  std::vector<Eigen::MatrixXd> chol_factors_;
  std::vector<double> log_scale_;  // log w_k - d/2 log(2 pi) - 1/2 log det
};

/// n i.i.d. draws: categorical component, then a Cholesky-transformed normal.
Matrix mixture_sampler(const GaussianMixture& mixture, std::size_t n, Rng& rng);

DensityTarget make_mixture_target(const GaussianMixture& mixture, Box domain);

/// Five elongated components on a star, rotated by 2 pi / 5 each.
GaussianMixture star_mixture_model();
/// Eight isotropic components on a circle of radius about 4.
GaussianMixture eight_mixture_model();

DensityTarget star_mixture();
DensityTarget eight_mixture();
/// rho(x) = exp(-0.1 x1^2 - (x2 - sin(pi x1))^2) / 9.93 on R^2.
DensityTarget wave_density();
/// N(0, sigma^2 I_d).
DensityTarget isotropic_gaussian(std::size_t d, double sigma);

}  // namespace evimmd
