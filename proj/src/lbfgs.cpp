#include "evimmd/lbfgs.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "evimmd/error.hpp"

namespace evimmd {

LbfgsMemory::LbfgsMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw InvalidArgument("L-BFGS memory must hold at least one pair");
}

bool LbfgsMemory::push(const Vector& s, const Vector& y) {
  const double sy = s.dot(y);
  const double yy = y.squaredNorm();
  if (!(sy > std::numeric_limits<double>::epsilon() * yy) || !std::isfinite(sy)) {
    return false;
  }
  if (pairs_.size() == capacity_) pairs_.pop_front();
  pairs_.push_back(Pair{s, y, 1.0 / sy});
  return true;
}

Vector LbfgsMemory::apply(const Vector& g, double fallback_scale) const {
  Vector q = g;
  std::vector<double> alpha(pairs_.size());
  for (std::size_t k = pairs_.size(); k-- > 0;) {
    alpha[k] = pairs_[k].rho * pairs_[k].s.dot(q);
    q -= alpha[k] * pairs_[k].y;
  }
  double gamma = fallback_scale;
  if (!pairs_.empty()) {
    const Pair& last = pairs_.back();
    gamma = last.s.dot(last.y) / last.y.squaredNorm();
  }
  Vector r = gamma * q;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const double beta = pairs_[k].rho * pairs_[k].y.dot(r);
    r += (alpha[k] - beta) * pairs_[k].s;
  }
  return r;
}

namespace {

bool finite_pair(double f, const Vector& g) { return std::isfinite(f) && g.allFinite(); }

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& objective, Vector start,
                           const LbfgsOptions& options) {
  if (!(options.initial_inverse_hessian > 0.0)) {
    throw InvalidArgument("initial inverse-Hessian scale must be positive");
  }
  LbfgsResult result;
  result.x = std::move(start);
  Vector g(result.x.size());
  result.value = objective(result.x, g);
  if (!finite_pair(result.value, g)) {
    throw NumericalFailure("objective not finite at the starting point");
  }
  result.initial_value = result.value;

  LbfgsMemory memory(options.memory);
  Vector trial(result.x.size());
  Vector trial_grad(result.x.size());
  while (true) {
    if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
      result.status = LbfgsStatus::kConverged;
      return result;
    }
    if (result.iterations >= options.max_iterations) {
      result.status = LbfgsStatus::kMaxIterations;
      return result;
    }

    Vector direction = -memory.apply(g, options.initial_inverse_hessian);
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      memory.clear();
      direction = -options.initial_inverse_hessian * g;
      slope = g.dot(direction);
    }

    double step = 1.0;
    double trial_value = 0.0;
    bool accepted = false;
    for (std::size_t k = 0; k <= options.max_backtracks; ++k) {
      trial = result.x + step * direction;
      trial_value = objective(trial, trial_grad);
      if (!finite_pair(trial_value, trial_grad)) {
        throw NumericalFailure("objective not finite during line search", result.x);
      }
      if (trial_value <= result.value + options.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= options.contraction;
    }

    if (!accepted) {
      if (memory.size() > 0) {
        // Quasi-Newton direction failed; retry once along scaled steepest descent.
        memory.clear();
        continue;
      }
      result.status = LbfgsStatus::kLineSearchStall;
      return result;
    }

    // A discarded pair leaves stale curvature that can shrink every later
    // step; restart from the scaled gradient instead.
    if (!memory.push(trial - result.x, trial_grad - g)) memory.clear();
    result.x.swap(trial);
    g.swap(trial_grad);
    result.value = trial_value;
    ++result.iterations;
  }
}

LbfgsResult lbfgs_minimize(const ObjectiveFn& objective, Vector start,
                           const SolverConfig& config) {
  LbfgsOptions options;
  options.memory = config.lbfgs_memory;
  options.max_iterations = config.lbfgs_max_inner;
  options.grad_tol = config.lbfgs_grad_tol;
  return lbfgs_minimize(objective, std::move(start), options);
}

}  // namespace evimmd
