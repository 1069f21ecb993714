#pragma once

#include <vector>

#include "evimmd/model.hpp"

namespace evimmd {

/// Biased (V-statistic) squared MMD with all three double sums.
double mmd2_two_sample(const Matrix& x, const Matrix& y, const KernelConfig& kernel);

/// (2/NM) sum |x_i - y_l| - (1/N^2) sum |x_i - x_j| - (1/M^2) sum |y_l - y_k|.
double energy_distance(const Matrix& x, const Matrix& y);

/// Fraction of particles whose nearest mean is mean k (lowest index wins ties).
std::vector<double> mode_occupancy(const Matrix& particles,
                                   const std::vector<Vector>& means);

/// Evaluates particle sets against one fixed reference sample, caching the
/// reference-only terms of both statistics.
class ReferenceEvaluator {
 public:
  ReferenceEvaluator(Matrix reference, double mmd_bandwidth);

  double mmd2(const Matrix& x) const;
  double energy_distance(const Matrix& x) const;

  const Matrix& reference() const { return reference_; }
  double mmd_bandwidth() const { return kernel_.bandwidth(); }

 private:
  Matrix reference_;
  KernelConfig kernel_;
  double mmd_ref_term_;
  double energy_ref_term_;
};

}  // namespace evimmd
