#include "evimmd/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "evimmd/error.hpp"

namespace evimmd {

namespace {

void require_finite(const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size()) {
    throw InvalidArgument("kernel arguments differ in dimension");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw InvalidArgument("kernel arguments must be finite");
  }
}

void require_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgument("Gaussian kernel bandwidth must be positive and finite");
  }
}

void require_points(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw InvalidArgument("point sets differ in dimension");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw InvalidArgument("point sets must be finite");
  }
}

double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b,
                        Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const double diff = a(i, k) - b(j, k);
    s += diff * diff;
  }
  return s;
}

// Value and gradient weight of a radial kernel at squared distance sq.
struct RadialValue {
  double value;
  double weight;
};

RadialValue radial(double sq, const KernelConfig& kernel) {
  if (kernel.kind() == KernelKind::kGaussian) {
    const double inv_h2 = 1.0 / (kernel.bandwidth() * kernel.bandwidth());
    const double v = std::exp(-0.5 * sq * inv_h2);
    return {v, -v * inv_h2};
  }
  const double dist = std::sqrt(std::max(sq, 0.0));
  return {-dist, dist > 0.0 ? -1.0 / dist : 0.0};
}

}  // namespace

double gauss_eval(const Eigen::Ref<const Vector>& x,
                  const Eigen::Ref<const Vector>& y, double h) {
  require_finite(x, y);
  require_bandwidth(h);
  return std::exp(-(x - y).squaredNorm() / (2.0 * h * h));
}

Vector gauss_grad_x(const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& y, double h) {
  const double k = gauss_eval(x, y, h);
  return -(x - y) * (k / (h * h));
}

double neg_euclid_eval(const Eigen::Ref<const Vector>& x,
                       const Eigen::Ref<const Vector>& y) {
  require_finite(x, y);
  return -std::sqrt(std::max((x - y).squaredNorm(), 0.0));
}

Vector neg_euclid_grad_x(const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& y) {
  require_finite(x, y);
  const double dist = std::sqrt(std::max((x - y).squaredNorm(), 0.0));
  if (dist == 0.0) return Vector::Zero(x.size());
  return -(x - y) / dist;
}

double kernel_eval(const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y, const KernelConfig& kernel) {
  return kernel.kind() == KernelKind::kGaussian
             ? gauss_eval(x, y, kernel.bandwidth())
             : neg_euclid_eval(x, y);
}

Vector kernel_grad_x(const Eigen::Ref<const Vector>& x,
                     const Eigen::Ref<const Vector>& y, const KernelConfig& kernel) {
  return kernel.kind() == KernelKind::kGaussian
             ? gauss_grad_x(x, y, kernel.bandwidth())
             : neg_euclid_grad_x(x, y);
}

Matrix gram(const Matrix& points, const KernelConfig& kernel) {
  require_points(points, points);
  const Eigen::Index n = points.rows();
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = radial(0.0, kernel).value;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      g(i, j) = radial(squared_distance(points, i, points, j), kernel).value;
      g(j, i) = g(i, j);
    }
  }
  return g;
}

Matrix cross_gram(const Matrix& a, const Matrix& b, const KernelConfig& kernel) {
  require_points(a, b);
  Matrix c(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      c(i, j) = radial(squared_distance(a, i, b, j), kernel).value;
    }
  }
  return c;
}

PairwiseKernel pairwise_with_gradients(const Matrix& a, const Matrix& b,
                                       const KernelConfig& kernel) {
  require_points(a, b);
  PairwiseKernel pk{Matrix(a.rows(), b.rows()), Matrix(a.rows(), b.rows())};
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const RadialValue r = radial(squared_distance(a, i, b, j), kernel);
      pk.values(i, j) = r.value;
      pk.weights(i, j) = r.weight;
    }
  }
  return pk;
}

Matrix summed_gradients(const PairwiseKernel& pk, const Matrix& a, const Matrix& b) {
  // sum_j w_ij (a_i - b_j) = (sum_j w_ij) a_i - (W b)_i
  const Vector row_sums = pk.weights.rowwise().sum();
  Matrix out = a.array().colwise() * row_sums.array();
  out.noalias() -= pk.weights * b;
  return out;
}

}  // namespace evimmd
