#pragma once

#include <variant>

#include "evimmd/model.hpp"

namespace evimmd {

/// Standard-normal draws xi_1..xi_L used by the density-branch cross-term
/// estimator. Drawn once per run and reused for every bandwidth, which makes
/// the estimated free energy a deterministic function of the particles.
class McNoise {
 public:
  explicit McNoise(Matrix xi);
  static McNoise draw(std::size_t samples, std::size_t dim, Rng& rng);

  const Matrix& xi() const { return xi_; }
  std::size_t size() const { return static_cast<std::size_t>(xi_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(xi_.cols()); }

 private:
  Matrix xi_;
};

/// Cross term through the Gaussian-convolution Monte-Carlo estimator.
struct DensityBranch {
  const DensityTarget& target;
  const McNoise& noise;
};

/// Cross term against the current mini-batch of training rows.
struct EmpiricalBranch {
  const Matrix& batch;
};

using TargetBranch = std::variant<DensityBranch, EmpiricalBranch>;

/// (1/N^2) sum_{i,j} K(x_i, x_j).
double square_term(const Matrix& particles, const KernelConfig& kernel);

/// sum_i (C_h / L) sum_l rho*(x_i + h xi_l), C_h = (2 pi)^{d/2} h^d.
double cross_term_density(const Matrix& particles, const DensityTarget& target,
                          double h, const McNoise& noise);

/// (1/L_batch) sum_i sum_j K(x_i, y_j).
double cross_term_empirical(const Matrix& particles, const Matrix& batch,
                            const KernelConfig& kernel);

/// -(2/N) * cross term + square term. The target-only constant of the squared
/// discrepancy is omitted, so the value may be negative.
double free_energy(const Matrix& particles, const TargetBranch& branch,
                   const KernelConfig& kernel);

/// d free_energy / d particles, same shape as `particles`.
Matrix grad_free_energy(const Matrix& particles, const TargetBranch& branch,
                        const KernelConfig& kernel);

/// Both at once; shares the kernel and density evaluations.
double free_energy_and_gradient(const Matrix& particles, const TargetBranch& branch,
                                const KernelConfig& kernel, Matrix& gradient);

}  // namespace evimmd
