#include "evimmd/metrics.hpp"

#include <limits>

#include "evimmd/error.hpp"
#include "evimmd/kernels.hpp"

namespace evimmd {

namespace {

void require_nonempty(const Matrix& x, const Matrix& y) {
  if (x.rows() < 1 || y.rows() < 1) {
    throw InvalidArgument("two-sample statistics need non-empty sets");
  }
  if (x.cols() != y.cols()) throw InvalidArgument("sample dimensions differ");
}

// Mean of K over all pairs, summed row by row in a fixed order.
double mean_kernel(const Matrix& a, const Matrix& b, const KernelConfig& kernel) {
  const Matrix c = &a == &b ? gram(a, kernel) : cross_gram(a, b, kernel);
  double total = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < c.cols(); ++j) row += c(i, j);
    total += row;
  }
  return total / (static_cast<double>(c.rows()) * static_cast<double>(c.cols()));
}

}  // namespace

double mmd2_two_sample(const Matrix& x, const Matrix& y, const KernelConfig& kernel) {
  require_nonempty(x, y);
  return mean_kernel(x, x, kernel) - 2.0 * mean_kernel(x, y, kernel) +
         mean_kernel(y, y, kernel);
}

double energy_distance(const Matrix& x, const Matrix& y) {
  require_nonempty(x, y);
  // K = -|x - y| turns the MMD expression into the energy distance.
  return mmd2_two_sample(x, y, KernelConfig::negative_euclidean());
}

std::vector<double> mode_occupancy(const Matrix& particles,
                                   const std::vector<Vector>& means) {
  if (means.empty()) throw InvalidArgument("mode occupancy needs at least one mean");
  if (particles.rows() < 1) throw InvalidArgument("mode occupancy needs particles");
  std::vector<double> counts(means.size(), 0.0);
  for (Eigen::Index i = 0; i < particles.rows(); ++i) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < means.size(); ++k) {
      const double dist = (particles.row(i).transpose() - means[k]).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    counts[best] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(particles.rows());
  return counts;
}

ReferenceEvaluator::ReferenceEvaluator(Matrix reference, double mmd_bandwidth)
    : reference_(std::move(reference)),
      kernel_(KernelConfig::gaussian(mmd_bandwidth)) {
  if (reference_.rows() < 1) throw InvalidArgument("reference set must not be empty");
  mmd_ref_term_ = mean_kernel(reference_, reference_, kernel_);
  energy_ref_term_ =
      mean_kernel(reference_, reference_, KernelConfig::negative_euclidean());
}

double ReferenceEvaluator::mmd2(const Matrix& x) const {
  require_nonempty(x, reference_);
  return mean_kernel(x, x, kernel_) - 2.0 * mean_kernel(x, reference_, kernel_) +
         mmd_ref_term_;
}

double ReferenceEvaluator::energy_distance(const Matrix& x) const {
  require_nonempty(x, reference_);
  const KernelConfig neg = KernelConfig::negative_euclidean();
  return mean_kernel(x, x, neg) - 2.0 * mean_kernel(x, reference_, neg) +
         energy_ref_term_;
}

}  // namespace evimmd
