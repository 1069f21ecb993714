#include "evimmd/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "evimmd/baselines.hpp"
#include "evimmd/csv.hpp"
#include "evimmd/error.hpp"
#include "evimmd/metrics.hpp"
#include "evimmd/random.hpp"
#include "evimmd/solver.hpp"
#include "evimmd/targets.hpp"

namespace evimmd {

namespace fs = std::filesystem;

ExitCode exit_code_for(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err == nullptr) {
    return dynamic_cast<const fs::filesystem_error*>(&e) != nullptr ? ExitCode::kIo
                                                                    : ExitCode::kNumerical;
  }
  switch (err->code()) {
    case ErrorCode::kIo:
      return ExitCode::kIo;
    case ErrorCode::kNumericalFailure:
      return ExitCode::kNumerical;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnsupported:
    case ErrorCode::kParse:
    case ErrorCode::kValidation:
      return ExitCode::kConfig;
  }
  return ExitCode::kNumerical;
}

namespace {

DensityTarget synthetic_target(TargetKind kind, std::size_t dim, double sigma) {
  switch (kind) {
    case TargetKind::kStar: return star_mixture();
    case TargetKind::kEight: return eight_mixture();
    case TargetKind::kWave: return wave_density();
    case TargetKind::kGaussian: return isotropic_gaussian(dim, sigma);
    case TargetKind::kCsv: break;
  }
  throw InvalidArgument("csv targets have no density");
}

// The problem a cell runs on: a density, training data, or both.
struct Problem {
  std::optional<DensityTarget> density;
  std::optional<EmpiricalTarget> empirical;
  Matrix reference;
};

bool uses_samples(const ExperimentConfig& cfg) {
  if (cfg.method == Method::kSvgd || cfg.method == Method::kLmc) return false;
  return cfg.target.kind == TargetKind::kCsv || cfg.target.kind == TargetKind::kGaussian ||
         cfg.method == Method::kEnergyDistance;
}

Problem build_problem(const ExperimentConfig& cfg) {
  Problem p;
  Rng reference_rng = make_stream(cfg.seed, Stream::kReference);
  if (cfg.target.kind == TargetKind::kCsv) {
    Matrix data = read_matrix_csv(cfg.target.path);
    if (cfg.mc_samples > static_cast<std::size_t>(data.rows())) {
      throw ValidationError("L", "mini-batch size exceeds the dataset size");
    }
    const std::size_t m = static_cast<std::size_t>(data.rows());
    // The evaluation reference is a random subset of the data.
    const EmpiricalTarget pool(data, std::min(cfg.reference_samples, m));
    p.reference = pool.draw_minibatch(reference_rng);
    p.empirical.emplace(std::move(data), cfg.mc_samples);
    return p;
  }
  DensityTarget density = synthetic_target(cfg.target.kind, cfg.target.dim, cfg.target.sigma);
  p.reference = density.sample(cfg.reference_samples, reference_rng);
  if (uses_samples(cfg)) {
    Rng training_rng = make_stream(cfg.seed, Stream::kTraining);
    p.empirical.emplace(density.sample(cfg.target.train_size, training_rng), cfg.mc_samples);
  }
  p.density.emplace(std::move(density));
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

void make_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory: " + ec.message());
}

struct CellOutcome {
  ExitCode code = ExitCode::kOk;
  std::string message;
  RunRow last_row;
  double a = std::numeric_limits<double>::quiet_NaN();
  std::size_t dim = 0;
};

bool has_schedule(Method m) { return m == Method::kEviMmd || m == Method::kExplicitMmd; }

RunResult dispatch(const ExperimentConfig& cfg, const Problem& p, const RunOptions& options) {
  SolverConfig solver;
  solver.tau_star = cfg.tau_star;
  solver.mc_samples = cfg.mc_samples;
  solver.max_iter = cfg.max_iter;
  solver.lbfgs_memory = cfg.lbfgs_memory;
  solver.lbfgs_max_inner = cfg.lbfgs_max_inner;
  solver.lbfgs_grad_tol = cfg.lbfgs_grad_tol;
  solver.seed = cfg.seed;
  const ScheduleSpec schedule{cfg.a, cfg.b, cfg.c};
  const bool empirical = uses_samples(cfg);

  switch (cfg.method) {
    case Method::kEviMmd:
      return empirical ? evi_mmd_run(*p.empirical, schedule, solver, options)
                       : evi_mmd_run(*p.density, schedule, solver, options);
    case Method::kExplicitMmd:
      return empirical
                 ? explicit_euler_mmd_run(*p.empirical, schedule, cfg.step_size, solver, options)
                 : explicit_euler_mmd_run(*p.density, schedule, cfg.step_size, solver, options);
    case Method::kEnergyDistance:
      return energy_distance_run(*p.empirical, solver, options);
    case Method::kSvgd: {
      SvgdConfig svgd;
      svgd.bandwidth = cfg.bandwidth;
      svgd.step = cfg.step_size;
      svgd.max_iter = cfg.max_iter;
      svgd.seed = cfg.seed;
      return svgd_run(*p.density, svgd, options);
    }
    case Method::kLmc: {
      LmcConfig lmc;
      lmc.schedule = LmcSchedule(cfg.lmc_a, cfg.lmc_b, cfg.lmc_c);
      lmc.max_iter = cfg.max_iter;
      lmc.seed = cfg.seed;
      return lmc_run(*p.density, lmc, options);
    }
  }
  throw InvalidArgument("unknown method");
}

std::string snapshot_name(std::size_t n) {
  return "particles_iter_" + std::to_string(n) + ".csv";
}

CellOutcome run_cell(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out(cfg.output_dir);
  make_directory(out);
  const Problem problem = build_problem(cfg);
  const ReferenceEvaluator evaluator(problem.reference, cfg.eval_bandwidth);

  RunOptions options;
  options.num_particles = cfg.num_particles;
  options.metrics_stride = cfg.metrics_stride;
  options.evaluator = &evaluator;
  // Draw the start here so it can be written before the run begins.
  const bool empirical = uses_samples(cfg);
  const Box box = empirical ? problem.empirical->bounding_box() : problem.density->domain();
  const std::size_t dim = empirical ? problem.empirical->dim() : problem.density->dim();
  options.initial_particles = initial_particles(box, dim, options, cfg.seed);
  write_particles(ParticleSet(*options.initial_particles, 0), out / snapshot_name(0));

  const std::set<std::size_t> snapshots(cfg.snapshots.begin(), cfg.snapshots.end());
  options.on_step = [&](const ParticleSet& ps) {
    if (snapshots.count(ps.iteration()) != 0) {
      write_particles(ps, out / snapshot_name(ps.iteration()));
    }
  };
  const std::size_t progress_every = std::max<std::size_t>(cfg.max_iter / 10, 1);
  options.on_row = [&](const ParticleSet& ps, const RunRow& row) {
    if (ps.iteration() % progress_every != 0 && ps.iteration() != cfg.max_iter) return;
    log << "  iter " << row.iteration << "  h=" << format_real(row.bandwidth)
        << "  F=" << format_real(row.free_energy)
        << "  mmd2_eval=" << format_real(row.mmd2_eval) << '\n';
  };

  log << "running " << method_name(cfg.method) << " on " << target_name(cfg.target.kind)
      << " (N=" << cfg.num_particles << ", d=" << dim << ", maxIter=" << cfg.max_iter
      << ") -> " << out.string() << '\n';
  const RunResult result = dispatch(cfg, problem, options);

  write_run_record(result.record, out / "run_record.csv");
  write_particles(result.particles, out / "particles_final.csv");
  ExperimentConfig resolved = cfg;
  if (has_schedule(cfg.method)) resolved.a = result.schedule_a;
  resolved.tau_star_follows_dim = false;
  resolved.step_follows_tau = false;
  write_text(out / "resolved_config.yaml", dump_config(resolved));

  CellOutcome outcome;
  outcome.dim = dim;
  outcome.a = result.schedule_a;
  if (!result.record.empty()) outcome.last_row = result.record.back();
  if (!result.ok()) {
    outcome.code = ExitCode::kNumerical;
    outcome.message = "numerical failure at " + result.failure;
  }
  return outcome;
}

CellOutcome guarded_cell(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    return run_cell(cfg, log);
  } catch (const std::exception& e) {
    CellOutcome outcome;
    outcome.code = exit_code_for(e);
    outcome.message = e.what();
    return outcome;
  }
}

ExitCode run_sweep(const ExperimentConfig& base, std::ostream& log) {
  const SweepSpec& sweep = base.sweep;
  auto axis = [](const std::vector<double>& values, double fallback) {
    return values.empty() ? std::vector<double>{fallback} : values;
  };
  const std::vector<double> a_values =
      sweep.a.empty() ? std::vector<double>{base.a.value_or(0.0)} : sweep.a;
  const std::vector<double> c_values = axis(sweep.c, base.c);
  const std::vector<double> tau_values = axis(sweep.tau_star, base.tau_star);
  const std::vector<std::size_t> dim_values =
      sweep.dim.empty() ? std::vector<std::size_t>{base.target.dim} : sweep.dim;

  const fs::path root(base.output_dir);
  make_directory(root);
  std::ofstream summary(root / "sweep_summary.csv", std::ios::binary | std::ios::trunc);
  if (!summary) throw IoError((root / "sweep_summary.csv").string(), "cannot open for writing");
  summary << "cell,a,c,tau_star,d,final_iter,final_h_n,final_free_energy,final_mmd2_eval,"
             "final_energy_dist_eval,status\n";

  ExitCode worst = ExitCode::kOk;
  std::size_t cell = 0;
  for (std::size_t d : dim_values) {
    for (double tau : tau_values) {
      for (double a : a_values) {
        for (double c : c_values) {
          ExperimentConfig cfg = base;
          cfg.sweep = SweepSpec{};
          cfg.target.dim = d;
          cfg.tau_star = tau;
          if (sweep.tau_star.empty() && base.tau_star_follows_dim &&
              base.target.kind == TargetKind::kGaussian) {
            cfg.tau_star = static_cast<double>(d);
          }
          cfg.tau_star_follows_dim = false;
          if (base.step_follows_tau) cfg.step_size = cfg.tau_star;
          cfg.step_follows_tau = false;
          if (!sweep.a.empty()) cfg.a = a;
          cfg.c = c;
          char name[32];
          std::snprintf(name, sizeof name, "cell_%03zu", cell);
          cfg.output_dir = (root / name).string();
          log << "[" << name << "] a=" << (cfg.a ? format_real(*cfg.a) : "auto")
              << " c=" << format_real(c) << " tau_star=" << format_real(cfg.tau_star)
              << " d=" << d << '\n';

          const CellOutcome outcome = guarded_cell(cfg, log);
          if (outcome.code != ExitCode::kOk) {
            log << "[" << name << "] " << outcome.message << '\n';
            worst = std::max(worst, outcome.code);
          }
          const RunRow& r = outcome.last_row;
          summary << name << ',' << format_real(outcome.a) << ',' << format_real(c) << ','
                  << format_real(cfg.tau_star) << ',' << outcome.dim << ',' << r.iteration
                  << ',' << format_real(r.bandwidth) << ',' << format_real(r.free_energy)
                  << ',' << format_real(r.mmd2_eval) << ','
                  << format_real(r.energy_distance_eval) << ','
                  << (outcome.code == ExitCode::kOk ? "ok" : "failed") << '\n';
          ++cell;
        }
      }
    }
  }
  summary.flush();
  if (!summary) throw IoError((root / "sweep_summary.csv").string(), "write failed");
  write_text(root / "resolved_config.yaml", dump_config(base));
  return worst;
}

}  // namespace

Matrix sample_named_target(std::string_view name, std::size_t n, std::uint64_t seed,
                           std::size_t gaussian_dim, double gaussian_sigma) {
  TargetKind kind;
  if (name == "star") {
    kind = TargetKind::kStar;
  } else if (name == "eight") {
    kind = TargetKind::kEight;
  } else if (name == "wave") {
    kind = TargetKind::kWave;
  } else if (name == "gaussian") {
    kind = TargetKind::kGaussian;
  } else {
    throw InvalidArgument("unknown target '" + std::string(name) +
                          "' (expected star, eight, wave or gaussian)");
  }
  if (n < 1) throw InvalidArgument("sample count must be at least 1");
  const DensityTarget target = synthetic_target(kind, gaussian_dim, gaussian_sigma);
  Rng rng = make_stream(seed, Stream::kReference);
  return target.sample(n, rng);
}

ExitCode run_experiment(const ExperimentConfig& config, std::ostream& log) {
  try {
    validate(config);
    if (!config.sweep.empty()) return run_sweep(config, log);
    const CellOutcome outcome = run_cell(config, log);
    if (outcome.code != ExitCode::kOk) log << "error: " << outcome.message << '\n';
    return outcome.code;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace evimmd
