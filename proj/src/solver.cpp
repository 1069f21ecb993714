#include "evimmd/solver.hpp"

#include <cmath>

#include "evimmd/bandwidth.hpp"
#include "evimmd/error.hpp"
#include "evimmd/random.hpp"

namespace evimmd {

double proximal_objective(const Matrix& candidate, const Matrix& anchor,
                          double tau_star, const FreeEnergyFn& free_energy) {
  if (candidate.rows() != anchor.rows() || candidate.cols() != anchor.cols()) {
    throw InvalidArgument("candidate and anchor shapes differ");
  }
  const double n = static_cast<double>(candidate.rows());
  return (candidate - anchor).squaredNorm() / (2.0 * tau_star * n) +
         free_energy(candidate, nullptr);
}

double proximal_objective_and_gradient(const Matrix& candidate, const Matrix& anchor,
                                       double tau_star, const FreeEnergyFn& free_energy,
                                       Matrix& gradient) {
  if (candidate.rows() != anchor.rows() || candidate.cols() != anchor.cols()) {
    throw InvalidArgument("candidate and anchor shapes differ");
  }
  const double n = static_cast<double>(candidate.rows());
  const double value = free_energy(candidate, &gradient);
  const Matrix step = candidate - anchor;
  gradient += step / (tau_star * n);
  return step.squaredNorm() / (2.0 * tau_star * n) + value;
}

Matrix initial_particles(const Box& box, std::size_t dim, const RunOptions& options,
                         std::uint64_t seed) {
  if (box.dim() != dim) throw InvalidArgument("initialization box has wrong dimension");
  if (options.initial_particles) {
    const Matrix& given = *options.initial_particles;
    if (given.rows() < 1 || static_cast<std::size_t>(given.cols()) != dim) {
      throw InvalidArgument("initial particles must be N x d with N >= 1");
    }
    return given;
  }
  if (options.num_particles < 1) throw ValidationError("N", "must be at least 1");
  Rng rng = make_stream(seed, Stream::kInit);
  return uniform_in_box(box, options.num_particles, rng);
}

namespace {

// What the shared implicit-Euler loop needs to know about the problem.
struct ImplicitProblem {
  const DensityTarget* density = nullptr;
  const EmpiricalTarget* empirical = nullptr;
  // Without a schedule the negative-Euclidean kernel is used.
  std::optional<BandwidthSchedule> schedule;
};

void fill_evaluation(RunRow& row, const Matrix& particles, std::size_t n,
                     std::size_t max_iter, const RunOptions& options) {
  if (options.evaluator == nullptr) return;
  const std::size_t stride = std::max<std::size_t>(options.metrics_stride, 1);
  if (n % stride != 0 && n != max_iter) return;
  row.mmd2_eval = options.evaluator->mmd2(particles);
  row.energy_distance_eval = options.evaluator->energy_distance(particles);
}

RunResult run_implicit(const ImplicitProblem& problem, const SolverConfig& config,
                       const RunOptions& options, Matrix start, double schedule_a) {
  const Eigen::Index n_particles = start.rows();
  const Eigen::Index dim = start.cols();
  const double n_real = static_cast<double>(n_particles);

  std::optional<McNoise> noise;
  if (problem.density != nullptr) {
    Rng noise_rng = make_stream(config.seed, Stream::kMcNoise);
    noise = McNoise::draw(config.mc_samples, static_cast<std::size_t>(dim), noise_rng);
  }
  Rng batch_rng = make_stream(config.seed, Stream::kMiniBatch);

  RunResult result{ParticleSet(std::move(start), 0), RunRecord{}, {}, schedule_a};

  LbfgsOptions lbfgs;
  lbfgs.memory = config.lbfgs_memory;
  lbfgs.max_iterations = config.lbfgs_max_inner;
  lbfgs.grad_tol = config.lbfgs_grad_tol;
  // The proximal term has curvature 1 / (tau* N); its inverse is the natural
  // first-step scale before curvature pairs exist.
  lbfgs.initial_inverse_hessian = config.tau_star * n_real;

  for (std::size_t n = 1; n <= config.max_iter; ++n) {
    const KernelConfig kernel =
        problem.schedule ? KernelConfig::gaussian(bandwidth_at(*problem.schedule, n))
                         : KernelConfig::negative_euclidean();
    Matrix batch;
    if (problem.empirical != nullptr) batch = problem.empirical->draw_minibatch(batch_rng);
    const TargetBranch branch =
        problem.density != nullptr ? TargetBranch(DensityBranch{*problem.density, *noise})
                                   : TargetBranch(EmpiricalBranch{batch});
    const FreeEnergyFn energy = [&](const Matrix& p, Matrix* g) {
      return g != nullptr ? free_energy_and_gradient(p, branch, kernel, *g)
                          : free_energy(p, branch, kernel);
    };

    const Matrix& anchor = result.particles.positions();
    Matrix candidate(n_particles, dim);
    Matrix grad_matrix;
    const ObjectiveFn objective = [&](const Vector& v, Vector& grad) {
      candidate = Eigen::Map<const Matrix>(v.data(), n_particles, dim);
      const double value = proximal_objective_and_gradient(candidate, anchor,
                                                           config.tau_star, energy,
                                                           grad_matrix);
      grad = Eigen::Map<const Vector>(grad_matrix.data(), grad_matrix.size());
      return value;
    };

    LbfgsResult inner;
    try {
      inner = lbfgs_minimize(objective,
                             Eigen::Map<const Vector>(anchor.data(), anchor.size()),
                             lbfgs);
    } catch (const NumericalFailure& e) {
      result.failure = "iteration " + std::to_string(n) + ": " + e.what();
      break;
    }

    Matrix next = Eigen::Map<const Matrix>(inner.x.data(), n_particles, dim);
    RunRow row;
    row.iteration = n;
    row.bandwidth = problem.schedule ? kernel.bandwidth()
                                     : std::numeric_limits<double>::quiet_NaN();
    row.free_energy = energy(next, nullptr);
    if (!problem.schedule && problem.empirical != nullptr) {
      // Report the full energy distance: add the batch-only term back.
      row.free_energy += square_term(batch, kernel);
    }
    row.inner_iterations = inner.iterations;
    row.displacement = (next - anchor).squaredNorm();
    row.objective_at_anchor = inner.initial_value;
    row.objective_at_update = inner.value;

    result.particles = result.particles.advanced(std::move(next), n);
    if (options.on_step) options.on_step(result.particles);
    fill_evaluation(row, result.particles.positions(), n, config.max_iter, options);
    result.record.append(row);
    if (options.on_row) options.on_row(result.particles, row);
  }
  return result;
}

double resolve_a(const ScheduleSpec& spec, const Matrix& start) {
  if (spec.a) return *spec.a;
  if (start.rows() < 2) {
    throw ValidationError("a", "automatic a needs at least two particles");
  }
  return median_pairwise_distance(start);
}

}  // namespace

RunResult evi_mmd_run(const DensityTarget& target, const ScheduleSpec& schedule,
                      const SolverConfig& config, const RunOptions& options) {
  config.validate();
  Matrix start = initial_particles(target.domain(), target.dim(), options, config.seed);
  const double a = resolve_a(schedule, start);
  ImplicitProblem problem;
  problem.density = &target;
  problem.schedule = BandwidthSchedule(a, schedule.b, schedule.c);
  return run_implicit(problem, config, options, std::move(start), a);
}

RunResult evi_mmd_run(const EmpiricalTarget& target, const ScheduleSpec& schedule,
                      const SolverConfig& config, const RunOptions& options) {
  config.validate();
  Matrix start =
      initial_particles(target.bounding_box(), target.dim(), options, config.seed);
  const double a = resolve_a(schedule, start);
  ImplicitProblem problem;
  problem.empirical = &target;
  problem.schedule = BandwidthSchedule(a, schedule.b, schedule.c);
  return run_implicit(problem, config, options, std::move(start), a);
}

RunResult energy_distance_run(const EmpiricalTarget& target, const SolverConfig& config,
                              const RunOptions& options) {
  config.validate();
  Matrix start =
      initial_particles(target.bounding_box(), target.dim(), options, config.seed);
  ImplicitProblem problem;
  problem.empirical = &target;
  return run_implicit(problem, config, options, std::move(start),
                      std::numeric_limits<double>::quiet_NaN());
}

}  // namespace evimmd
