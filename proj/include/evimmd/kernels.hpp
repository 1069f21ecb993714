#pragma once

#include "evimmd/model.hpp"

namespace evimmd {

/// exp(-|x - y|^2 / (2 h^2)).
double gauss_eval(const Eigen::Ref<const Vector>& x,
                  const Eigen::Ref<const Vector>& y, double h);

/// Gradient of gauss_eval with respect to its first argument.
Vector gauss_grad_x(const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& y, double h);

/// -|x - y|, the generator of the energy distance.
double neg_euclid_eval(const Eigen::Ref<const Vector>& x,
                       const Eigen::Ref<const Vector>& y);

/// Gradient of neg_euclid_eval in x; zero where x == y (subgradient choice).
Vector neg_euclid_grad_x(const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& y);

double kernel_eval(const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y, const KernelConfig& kernel);
Vector kernel_grad_x(const Eigen::Ref<const Vector>& x,
                     const Eigen::Ref<const Vector>& y, const KernelConfig& kernel);

/// G(i, j) = K(x_i, x_j). The upper triangle is computed and mirrored, so the
/// result is exactly symmetric.
Matrix gram(const Matrix& points, const KernelConfig& kernel);

/// C(i, j) = K(a_i, b_j).
Matrix cross_gram(const Matrix& a, const Matrix& b, const KernelConfig& kernel);

/// Kernel values together with scalar gradient weights. Both kernels in this
/// library are radial, so grad_{a_i} K(a_i, b_j) = weights(i, j) * (a_i - b_j).
struct PairwiseKernel {
  Matrix values;
  Matrix weights;
};

PairwiseKernel pairwise_with_gradients(const Matrix& a, const Matrix& b,
                                       const KernelConfig& kernel);

/// Row i = sum_j grad_{a_i} K(a_i, b_j), using the weights from
/// pairwise_with_gradients(a, b, ...).
Matrix summed_gradients(const PairwiseKernel& pk, const Matrix& a, const Matrix& b);

}  // namespace evimmd
