#pragma once

#include <cstddef>
#include <cstdint>

#include "evimmd/solver.hpp"

namespace evimmd {

/// Langevin step size eta(n) = a (b + n)^(-c).
class LmcSchedule {
 public:
  LmcSchedule(double a, double b, double c);

  double step(std::size_t n) const;
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }

 private:
  double a_;
  double b_;
  double c_;
};

/// Explicit-Euler MMD descent: x <- x - step * N * grad F_{h_n}(x). Uses the
/// same bandwidth schedule, frozen noise and mini-batch policy as the
/// implicit solver (mc_samples, max_iter and seed are read from `config`).
RunResult explicit_euler_mmd_run(const DensityTarget& target, const ScheduleSpec& schedule,
                                 double step, const SolverConfig& config,
                                 const RunOptions& options = {});
RunResult explicit_euler_mmd_run(const EmpiricalTarget& target,
                                 const ScheduleSpec& schedule, double step,
                                 const SolverConfig& config,
                                 const RunOptions& options = {});

struct SvgdConfig {
  double bandwidth = 0.1;
  double step = 0.1;
  std::size_t max_iter = 5000;
  std::uint64_t seed = 1;
};

/// One Stein variational gradient step:
/// x_i += (step / N) sum_j [K(x_j, x_i) grad log rho(x_j) + grad_{x_j} K(x_j, x_i)].
Matrix svgd_step(const Matrix& particles, const DensityTarget& target,
                 double bandwidth, double step);

RunResult svgd_run(const DensityTarget& target, const SvgdConfig& config,
                   const RunOptions& options = {});

struct LmcConfig {
  LmcSchedule schedule{0.1, 1.0, 0.55};
  std::size_t max_iter = 5000;
  std::uint64_t seed = 1;
  /// Test hook: false drops the Gaussian increment (pure drift).
  bool inject_noise = true;
};

/// Unadjusted Langevin: x <- x + (eta/2) grad log rho(x) + sqrt(eta) z.
RunResult lmc_run(const DensityTarget& target, const LmcConfig& config,
                  const RunOptions& options = {});

}  // namespace evimmd
