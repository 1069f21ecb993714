#include "evimmd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "evimmd/error.hpp"

namespace evimmd {

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

Box::Box(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size()) {
    throw InvalidArgument("box bounds must be non-empty and of equal length");
  }
  if (!lower_.allFinite() || !upper_.allFinite()) {
    throw InvalidArgument("box bounds must be finite");
  }
  if ((lower_.array() > upper_.array()).any()) {
    throw InvalidArgument("box lower bound exceeds upper bound");
  }
}

Box Box::cube(std::size_t dim, double lo, double hi) {
  return Box(Vector::Constant(static_cast<Eigen::Index>(dim), lo),
             Vector::Constant(static_cast<Eigen::Index>(dim), hi));
}

ParticleSet::ParticleSet(Matrix positions, std::size_t iteration)
    : positions_(std::move(positions)), iteration_(iteration) {
  if (positions_.rows() < 1 || positions_.cols() < 1) {
    throw InvalidArgument("particle set needs N >= 1 and d >= 1");
  }
  if (!positions_.allFinite()) {
    throw InvalidArgument("particle positions must be finite");
  }
}

ParticleSet ParticleSet::advanced(Matrix next, std::size_t iteration) const {
  if (next.rows() != positions_.rows() || next.cols() != positions_.cols()) {
    throw InvalidArgument("particle set shape is fixed for the whole run");
  }
  return ParticleSet(std::move(next), iteration);
}

DensityTarget::DensityTarget(Box domain, Callables fns)
    : domain_(std::move(domain)), fns_(std::move(fns)) {
  if (!fns_.density) {
    throw InvalidArgument("density target requires a density callable");
  }
}

double DensityTarget::density(const Eigen::Ref<const Vector>& x) const {
  return fns_.density(x);
}

Vector DensityTarget::grad_density(const Eigen::Ref<const Vector>& x) const {
  if (!fns_.grad_density) {
    throw Unsupported("density target has no gradient callable");
  }
  return fns_.grad_density(x);
}

Vector DensityTarget::grad_log_density(const Eigen::Ref<const Vector>& x) const {
  if (fns_.grad_log_density) return fns_.grad_log_density(x);
  const double rho = density(x);
  if (!(rho >= kDensityFloor)) {
    throw NumericalFailure("density underflow while forming grad log rho",
                           Vector(x));
  }
  return grad_density(x) / rho;
}

void DensityTarget::evaluate(const Matrix& points, Vector& values,
                             Matrix* gradients) const {
  if (fns_.batch) {
    fns_.batch(points, values, gradients);
    return;
  }
  const Eigen::Index n = points.rows();
  values.resize(n);
  if (gradients != nullptr) {
    if (!fns_.grad_density) {
      throw Unsupported("density target has no gradient callable");
    }
    gradients->resize(n, points.cols());
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    values(k) = fns_.density(points.row(k).transpose());
    if (gradients != nullptr) {
      gradients->row(k) = fns_.grad_density(points.row(k).transpose()).transpose();
    }
  }
}

Vector DensityTarget::sample(Rng& rng) const {
  if (!fns_.exact_sampler) {
    throw Unsupported("density target has no exact sampler");
  }
  return fns_.exact_sampler(rng);
}

Matrix DensityTarget::sample(std::size_t n, Rng& rng) const {
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim()));
  for (Eigen::Index k = 0; k < out.rows(); ++k) {
    out.row(k) = sample(rng).transpose();
  }
  return out;
}

EmpiricalTarget::EmpiricalTarget(Matrix data, std::size_t minibatch_size)
    : data_(std::move(data)), minibatch_size_(minibatch_size) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw InvalidArgument("empirical target needs at least one row and column");
  }
  if (!data_.allFinite()) {
    throw InvalidArgument("training data must be finite");
  }
  if (minibatch_size_ < 1 || minibatch_size_ > size()) {
    throw InvalidArgument("mini-batch size must lie in [1, M]");
  }
}

Box EmpiricalTarget::bounding_box() const {
  return Box(data_.colwise().minCoeff().transpose(),
             data_.colwise().maxCoeff().transpose());
}

Matrix EmpiricalTarget::draw_minibatch(Rng& rng) const {
  if (minibatch_size_ == size()) return data_;
  // Partial Fisher-Yates: the first L slots become a uniform subset.
  std::vector<Eigen::Index> idx(size());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (std::size_t k = 0; k < minibatch_size_; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, size() - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  Matrix batch(static_cast<Eigen::Index>(minibatch_size_), data_.cols());
  for (std::size_t k = 0; k < minibatch_size_; ++k) {
    batch.row(static_cast<Eigen::Index>(k)) = data_.row(idx[k]);
  }
  return batch;
}

KernelConfig KernelConfig::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InvalidArgument("Gaussian kernel bandwidth must be positive and finite");
  }
  return KernelConfig(KernelKind::kGaussian, bandwidth);
}

KernelConfig KernelConfig::negative_euclidean() {
  return KernelConfig(KernelKind::kNegativeEuclidean,
                      std::numeric_limits<double>::quiet_NaN());
}

BandwidthSchedule::BandwidthSchedule(double a, double b, double c)
    : a_(a), b_(b), c_(c) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(a)) throw InvalidArgument("bandwidth schedule: a must be positive");
  if (!positive(b)) throw InvalidArgument("bandwidth schedule: b must be positive");
  if (!positive(c)) throw InvalidArgument("bandwidth schedule: c must be positive");
}

void SolverConfig::validate() const {
  if (!(tau_star > 0.0) || !std::isfinite(tau_star)) {
    throw ValidationError("tau_star", "must be positive and finite");
  }
  if (mc_samples < 1) throw ValidationError("L", "must be at least 1");
  // max_iter == 0 is allowed here and means "return the initial particles";
  // experiment configs require at least one iteration.
  if (lbfgs_memory < 1) throw ValidationError("lbfgs_memory", "must be at least 1");
  if (lbfgs_max_inner < 1) {
    throw ValidationError("lbfgs_max_inner", "must be at least 1");
  }
  if (!(lbfgs_grad_tol > 0.0)) {
    throw ValidationError("lbfgs_grad_tol", "must be positive");
  }
}

void RunRecord::append(const RunRow& row) {
  if (!rows_.empty() && row.iteration <= rows_.back().iteration) {
    throw InvalidArgument("run record iterations must strictly increase");
  }
  rows_.push_back(row);
}

}  // namespace evimmd
