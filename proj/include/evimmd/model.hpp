#pragma once

// Domain types shared by every module: particles, targets, kernel and solver
// configuration, and the per-iteration run record.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace evimmd {

using Vector = Eigen::VectorXd;
/// Row i holds point i. Row-major so a particle's coordinates are contiguous.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Rng = std::mt19937_64;

bool all_finite(const Eigen::Ref<const Matrix>& m);

/// Axis-aligned box used to draw initial particles.
class Box {
 public:
  Box(Vector lower, Vector upper);
  static Box cube(std::size_t dim, double lo, double hi);

  std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  Vector lower_;
  Vector upper_;
};

/// N particles in d dimensions together with the outer-iteration index that
/// produced them. Shape never changes once constructed.
class ParticleSet {
 public:
  explicit ParticleSet(Matrix positions, std::size_t iteration = 0);

  const Matrix& positions() const { return positions_; }
  std::size_t size() const { return static_cast<std::size_t>(positions_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(positions_.cols()); }
  std::size_t iteration() const { return iteration_; }

  /// Successor state; rejects a shape change or non-finite entries.
  ParticleSet advanced(Matrix next, std::size_t iteration) const;

 private:
  Matrix positions_;
  std::size_t iteration_;
};

/// Fully specified target density rho* with its gradient.
///
/// Only `density` is mandatory. The batch callable, when present, evaluates
/// many points at once and is what the free-energy estimator uses on hot
/// paths; otherwise the point-wise callables are looped over.
class DensityTarget {
 public:
  using DensityFn = std::function<double(const Eigen::Ref<const Vector>&)>;
  using GradientFn = std::function<Vector(const Eigen::Ref<const Vector>&)>;
  /// Fills values(k) = rho*(row k) and, when gradients != nullptr, the
  /// matching gradient rows. Outputs are resized by the callee.
  using BatchFn =
      std::function<void(const Matrix& points, Vector& values, Matrix* gradients)>;
  using SamplerFn = std::function<Vector(Rng&)>;

  struct Callables {
    DensityFn density;
    GradientFn grad_density;
    GradientFn grad_log_density;
    BatchFn batch;
    SamplerFn exact_sampler;
  };

  /// Floor below which grad log rho is considered undefined.
  static constexpr double kDensityFloor = 1e-300;

  DensityTarget(Box domain, Callables fns);

  std::size_t dim() const { return domain_.dim(); }
  const Box& domain() const { return domain_; }

  double density(const Eigen::Ref<const Vector>& x) const;
  bool has_gradient() const { return static_cast<bool>(fns_.grad_density); }
  Vector grad_density(const Eigen::Ref<const Vector>& x) const;
  /// Uses the dedicated callable when supplied, else grad rho / rho with the
  /// positivity floor; throws NumericalFailure when rho underflows it.
  Vector grad_log_density(const Eigen::Ref<const Vector>& x) const;

  void evaluate(const Matrix& points, Vector& values, Matrix* gradients) const;

  bool has_sampler() const { return static_cast<bool>(fns_.exact_sampler); }
  Vector sample(Rng& rng) const;
  Matrix sample(std::size_t n, Rng& rng) const;

 private:
  Box domain_;
  Callables fns_;
};

/// Target known only through M training rows; the cross term is estimated on
/// a mini-batch of `minibatch_size` rows.
class EmpiricalTarget {
 public:
  EmpiricalTarget(Matrix data, std::size_t minibatch_size);

  const Matrix& data() const { return data_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(data_.cols()); }
  std::size_t minibatch_size() const { return minibatch_size_; }
  /// Per-coordinate min/max of the training data.
  Box bounding_box() const;

  Matrix draw_minibatch(Rng& rng) const;

 private:
  Matrix data_;
  std::size_t minibatch_size_;
};

enum class KernelKind { kGaussian, kNegativeEuclidean };

class KernelConfig {
 public:
  static KernelConfig gaussian(double bandwidth);
  static KernelConfig negative_euclidean();

  KernelKind kind() const { return kind_; }
  /// NaN for the negative-Euclidean kernel.
  double bandwidth() const { return bandwidth_; }

 private:
  KernelConfig(KernelKind kind, double bandwidth)
      : kind_(kind), bandwidth_(bandwidth) {}

  KernelKind kind_;
  double bandwidth_;
};

/// h(n) = a / n^c + b.
class BandwidthSchedule {
 public:
  BandwidthSchedule(double a, double b, double c);

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }

 private:
  double a_;
  double b_;
  double c_;
};

struct SolverConfig {
  double tau_star = 1.0;
  std::size_t mc_samples = 500;
  std::size_t max_iter = 500;
  std::size_t lbfgs_memory = 10;
  std::size_t lbfgs_max_inner = 50;
  double lbfgs_grad_tol = 1e-6;
  std::uint64_t seed = 1;

  /// Throws ValidationError naming the offending field.
  /// max_iter may be 0, which leaves the initial particles untouched.
  void validate() const;
};

struct RunRow {
  std::size_t iteration = 0;
  double bandwidth = std::numeric_limits<double>::quiet_NaN();
  double free_energy = std::numeric_limits<double>::quiet_NaN();
  double mmd2_eval = std::numeric_limits<double>::quiet_NaN();
  double energy_distance_eval = std::numeric_limits<double>::quiet_NaN();
  std::size_t inner_iterations = 0;
  /// Sum over particles of the squared move since the previous row.
  double displacement = 0.0;
  // Implicit methods only: J_n at the anchor and at the accepted update.
  // Kept in memory for invariant checks; not part of the CSV schema.
  double objective_at_anchor = std::numeric_limits<double>::quiet_NaN();
  double objective_at_update = std::numeric_limits<double>::quiet_NaN();
};

class RunRecord {
 public:
  /// Rejects rows whose iteration does not strictly increase.
  void append(const RunRow& row);

  const std::vector<RunRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }
  const RunRow& back() const { return rows_.back(); }

 private:
  std::vector<RunRow> rows_;
};

}  // namespace evimmd
