#include "evimmd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "evimmd/bandwidth.hpp"
#include "evimmd/error.hpp"
#include "evimmd/kernels.hpp"
#include "evimmd/random.hpp"

namespace evimmd {

LmcSchedule::LmcSchedule(double a, double b, double c) : a_(a), b_(b), c_(c) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(a) || !positive(b) || !positive(c)) {
    throw InvalidArgument("LMC schedule constants must be positive");
  }
}

double LmcSchedule::step(std::size_t n) const {
  return a_ * std::pow(b_ + static_cast<double>(n), -c_);
}

namespace {

bool due(std::size_t n, std::size_t stride, std::size_t last) {
  return n % std::max<std::size_t>(stride, 1) == 0 || n == last;
}

void evaluate_row(RunRow& row, const Matrix& particles, const RunOptions& options) {
  if (options.evaluator == nullptr) return;
  row.mmd2_eval = options.evaluator->mmd2(particles);
  row.energy_distance_eval = options.evaluator->energy_distance(particles);
}

RunResult explicit_run(const DensityTarget* density, const EmpiricalTarget* empirical,
                       const Box& box, std::size_t dim, const ScheduleSpec& spec,
                       double step, const SolverConfig& config,
                       const RunOptions& options) {
  config.validate();
  if (!(step > 0.0)) throw ValidationError("step_size", "must be positive");
  Matrix start = initial_particles(box, dim, options, config.seed);
  double a = 0.0;
  if (spec.a) {
    a = *spec.a;
  } else {
    if (start.rows() < 2) throw ValidationError("a", "automatic a needs N >= 2");
    a = median_pairwise_distance(start);
  }
  const BandwidthSchedule schedule(a, spec.b, spec.c);

  std::optional<McNoise> noise;
  if (density != nullptr) {
    Rng noise_rng = make_stream(config.seed, Stream::kMcNoise);
    noise = McNoise::draw(config.mc_samples, dim, noise_rng);
  }
  Rng batch_rng = make_stream(config.seed, Stream::kMiniBatch);

  const double n_real = static_cast<double>(start.rows());
  RunResult result{ParticleSet(std::move(start), 0), RunRecord{}, {}, a};
  for (std::size_t n = 1; n <= config.max_iter; ++n) {
    const KernelConfig kernel = KernelConfig::gaussian(bandwidth_at(schedule, n));
    Matrix batch;
    if (empirical != nullptr) batch = empirical->draw_minibatch(batch_rng);
    const TargetBranch branch = density != nullptr
                                    ? TargetBranch(DensityBranch{*density, *noise})
                                    : TargetBranch(EmpiricalBranch{batch});
    const Matrix& current = result.particles.positions();
    Matrix next = current - (step * n_real) * grad_free_energy(current, branch, kernel);
    if (!next.allFinite()) {
      result.failure = "iteration " + std::to_string(n) + ": explicit step diverged";
      break;
    }
    RunRow row;
    row.iteration = n;
    row.bandwidth = kernel.bandwidth();
    row.free_energy = free_energy(next, branch, kernel);
    row.inner_iterations = 1;
    row.displacement = (next - current).squaredNorm();
    result.particles = result.particles.advanced(std::move(next), n);
    if (options.on_step) options.on_step(result.particles);
    if (due(n, options.metrics_stride, config.max_iter)) {
      evaluate_row(row, result.particles.positions(), options);
    }
    result.record.append(row);
    if (options.on_row) options.on_row(result.particles, row);
  }
  return result;
}

Matrix grad_log_rows(const Matrix& particles, const DensityTarget& target) {
  Matrix out(particles.rows(), particles.cols());
  for (Eigen::Index i = 0; i < particles.rows(); ++i) {
    out.row(i) = target.grad_log_density(particles.row(i).transpose()).transpose();
  }
  return out;
}

// Shared loop of the single-loop baselines: a row every `stride` steps.
template <class Step>
RunResult single_loop(Matrix start, std::size_t max_iter, const RunOptions& options,
                      const KernelConfig* kernel, Step&& advance) {
  RunResult result{ParticleSet(std::move(start), 0), RunRecord{}, {},
                   std::numeric_limits<double>::quiet_NaN()};
  Matrix last_recorded = result.particles.positions();
  std::size_t steps_since_row = 0;
  for (std::size_t n = 1; n <= max_iter; ++n) {
    Matrix next;
    try {
      next = advance(result.particles.positions(), n);
    } catch (const NumericalFailure& e) {
      result.failure = "step " + std::to_string(n) + ": " + e.what();
      break;
    }
    if (!next.allFinite()) {
      result.failure = "step " + std::to_string(n) + ": particles became non-finite";
      break;
    }
    result.particles = result.particles.advanced(std::move(next), n);
    if (options.on_step) options.on_step(result.particles);
    ++steps_since_row;
    if (!due(n, options.metrics_stride, max_iter)) continue;

    RunRow row;
    row.iteration = n;
    if (kernel != nullptr) row.bandwidth = kernel->bandwidth();
    row.inner_iterations = steps_since_row;
    row.displacement = (result.particles.positions() - last_recorded).squaredNorm();
    evaluate_row(row, result.particles.positions(), options);
    result.record.append(row);
    if (options.on_row) options.on_row(result.particles, row);
    last_recorded = result.particles.positions();
    steps_since_row = 0;
  }
  return result;
}

}  // namespace

RunResult explicit_euler_mmd_run(const DensityTarget& target, const ScheduleSpec& schedule,
                                 double step, const SolverConfig& config,
                                 const RunOptions& options) {
  if (!target.has_gradient()) {
    throw Unsupported("explicit MMD descent needs the density gradient");
  }
  return explicit_run(&target, nullptr, target.domain(), target.dim(), schedule, step,
                      config, options);
}

RunResult explicit_euler_mmd_run(const EmpiricalTarget& target,
                                 const ScheduleSpec& schedule, double step,
                                 const SolverConfig& config, const RunOptions& options) {
  return explicit_run(nullptr, &target, target.bounding_box(), target.dim(), schedule,
                      step, config, options);
}

Matrix svgd_step(const Matrix& particles, const DensityTarget& target, double bandwidth,
                 double step) {
  const KernelConfig kernel = KernelConfig::gaussian(bandwidth);
  const Matrix scores = grad_log_rows(particles, target);
  // K is symmetric, and grad_{x_j} K(x_j, x_i) = -grad_{x_i} K(x_i, x_j), so the
  // repulsion for particle i is minus the summed first-argument gradient.
  const PairwiseKernel pk = pairwise_with_gradients(particles, particles, kernel);
  const Matrix drift = pk.values * scores;
  const Matrix repulsion = -summed_gradients(pk, particles, particles);
  return particles +
         (step / static_cast<double>(particles.rows())) * (drift + repulsion);
}

RunResult svgd_run(const DensityTarget& target, const SvgdConfig& config,
                   const RunOptions& options) {
  if (!(config.step >= 0.0)) throw ValidationError("step_size", "must be non-negative");
  const KernelConfig kernel = KernelConfig::gaussian(config.bandwidth);
  Matrix start = initial_particles(target.domain(), target.dim(), options, config.seed);
  return single_loop(std::move(start), config.max_iter, options, &kernel,
                     [&](const Matrix& x, std::size_t) {
                       return svgd_step(x, target, config.bandwidth, config.step);
                     });
}

RunResult lmc_run(const DensityTarget& target, const LmcConfig& config,
                  const RunOptions& options) {
  Matrix start = initial_particles(target.domain(), target.dim(), options, config.seed);
  Rng noise_rng = make_stream(config.seed, Stream::kLangevin);
  std::normal_distribution<double> normal(0.0, 1.0);
  return single_loop(std::move(start), config.max_iter, options, nullptr,
                     [&](const Matrix& x, std::size_t n) {
                       const double eta = config.schedule.step(n);
                       Matrix next = x + (0.5 * eta) * grad_log_rows(x, target);
                       if (config.inject_noise) {
                         const double scale = std::sqrt(eta);
                         for (Eigen::Index i = 0; i < next.rows(); ++i) {
                           for (Eigen::Index k = 0; k < next.cols(); ++k) {
                             next(i, k) += scale * normal(noise_rng);
                           }
                         }
                       }
                       return next;
                     });
}

}  // namespace evimmd
