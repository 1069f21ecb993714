#pragma once

#include <cstddef>
#include <deque>
#include <functional>

#include "evimmd/model.hpp"

namespace evimmd {

/// Returns f(x) and writes grad f(x) into `gradient` (already sized like x).
using ObjectiveFn = std::function<double(const Vector& x, Vector& gradient)>;

struct LbfgsOptions {
  std::size_t memory = 10;
  std::size_t max_iterations = 50;
  /// Stop once the gradient sup-norm falls to this value.
  double grad_tol = 1e-6;
  /// Inverse-Hessian scale used while no curvature pair is stored.
  double initial_inverse_hessian = 1.0;
  double armijo_c1 = 1e-4;
  double contraction = 0.5;
  std::size_t max_backtracks = 60;
};

enum class LbfgsStatus {
  kConverged,
  kMaxIterations,
  /// No step satisfying sufficient decrease was found; the returned point is
  /// the last accepted iterate.
  kLineSearchStall,
};

struct LbfgsResult {
  Vector x;
  double value = 0.0;
  /// Objective at the starting point.
  double initial_value = 0.0;
  std::size_t iterations = 0;
  LbfgsStatus status = LbfgsStatus::kConverged;
};

/// Ring of the most recent (s, y) curvature pairs and the two-loop recursion.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(std::size_t capacity);

  /// Stores the pair unless s.y is non-positive (or negligible against y.y);
  /// returns whether it was kept. The oldest pair is evicted when full.
  bool push(const Vector& s, const Vector& y);
  /// Applies the implicit inverse-Hessian approximation to g.
  Vector apply(const Vector& g, double fallback_scale) const;
  void clear() { pairs_.clear(); }

  std::size_t size() const { return pairs_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  struct Pair {
    Vector s;
    Vector y;
    double rho;
  };
  std::size_t capacity_;
  std::deque<Pair> pairs_;
};

/// Limited-memory BFGS with backtracking Armijo line search. The returned
/// value never exceeds f(start). Throws NumericalFailure (carrying the last
/// finite iterate) if f or its gradient becomes non-finite.
LbfgsResult lbfgs_minimize(const ObjectiveFn& objective, Vector start,
                           const LbfgsOptions& options);

/// Same, with memory / iteration cap / tolerance taken from a solver config.
LbfgsResult lbfgs_minimize(const ObjectiveFn& objective, Vector start,
                           const SolverConfig& config);

}  // namespace evimmd
