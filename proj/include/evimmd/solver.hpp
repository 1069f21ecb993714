#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "evimmd/free_energy.hpp"
#include "evimmd/lbfgs.hpp"
#include "evimmd/metrics.hpp"
#include "evimmd/model.hpp"

namespace evimmd {

/// Free energy of a particle matrix, optionally with its gradient.
using FreeEnergyFn = std::function<double(const Matrix& particles, Matrix* gradient)>;

/// J_n(x) = (1 / (2 tau* N)) sum_i |x_i - anchor_i|^2 + F(x).
double proximal_objective(const Matrix& candidate, const Matrix& anchor,
                          double tau_star, const FreeEnergyFn& free_energy);

/// J_n and its gradient (x - anchor) / (tau* N) + grad F.
double proximal_objective_and_gradient(const Matrix& candidate, const Matrix& anchor,
                                       double tau_star, const FreeEnergyFn& free_energy,
                                       Matrix& gradient);

/// Bandwidth schedule with `a` left open: unset means the median pairwise
/// distance of the initial particles.
struct ScheduleSpec {
  std::optional<double> a;
  double b = 0.1;
  double c = 0.5;
};

/// Settings common to every particle method.
struct RunOptions {
  std::size_t num_particles = 200;
  /// Overrides the uniform draw from the target's box; must be N x d.
  std::optional<Matrix> initial_particles;
  /// Implicit and explicit methods: evaluation metrics every `stride`
  /// iterations. Single-loop baselines: one record row per `stride` steps.
  std::size_t metrics_stride = 1;
  /// Optional; evaluation columns stay NaN without it.
  const ReferenceEvaluator* evaluator = nullptr;
  /// Called after every recorded row with the current particles.
  std::function<void(const ParticleSet&, const RunRow&)> on_row;
  /// Called after every accepted step, recorded or not.
  std::function<void(const ParticleSet&)> on_step;
};

struct RunResult {
  ParticleSet particles;
  RunRecord record;
  /// Empty on success; otherwise why the run stopped early.
  std::string failure;
  /// Resolved schedule parameter a (NaN for methods without a schedule).
  double schedule_a = std::numeric_limits<double>::quiet_NaN();

  bool ok() const { return failure.empty(); }
};

/// Uniform draw in the target's box, or the override from `options`.
Matrix initial_particles(const Box& box, std::size_t dim, const RunOptions& options,
                         std::uint64_t seed);

/// Implicit-Euler MMD descent with the adaptive Gaussian bandwidth. Each outer
/// iteration minimizes J_n from the previous particles with L-BFGS, so
/// J_n(x^(n+1)) <= J_n(x^(n)) always holds. A numerical failure inside the
/// inner solver ends the run with the rows recorded so far.
RunResult evi_mmd_run(const DensityTarget& target, const ScheduleSpec& schedule,
                      const SolverConfig& config, const RunOptions& options = {});
RunResult evi_mmd_run(const EmpiricalTarget& target, const ScheduleSpec& schedule,
                      const SolverConfig& config, const RunOptions& options = {});

/// Same outer loop with the energy distance as free energy (no bandwidth).
/// The recorded free energy includes the per-batch constant term.
RunResult energy_distance_run(const EmpiricalTarget& target,
                              const SolverConfig& config,
                              const RunOptions& options = {});

}  // namespace evimmd
