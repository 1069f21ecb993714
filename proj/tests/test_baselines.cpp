#include <gtest/gtest.h>

#include <cmath>

#include "evimmd/baselines.hpp"
#include "evimmd/error.hpp"
#include "evimmd/kernels.hpp"
#include "evimmd/random.hpp"
#include "evimmd/targets.hpp"
#include "test_support.hpp"

namespace evimmd {
namespace {

using testing::random_matrix;

RunOptions start_at(Matrix m) {
  RunOptions o;
  o.initial_particles = std::move(m);
  return o;
}

TEST(LmcSchedule, FirstStep) {
  const LmcSchedule s(0.1, 1.0, 0.55);
  EXPECT_NEAR(s.step(1), 0.1 * std::pow(2.0, -0.55), 1e-16);
  EXPECT_NEAR(s.step(1), 0.06830, 5e-6);
  EXPECT_THROW(LmcSchedule(0, 1, 1), InvalidArgument);
}

TEST(ExplicitEuler, OneStepMatchesGradientOracle) {
  std::mt19937_64 gen(1);
  const DensityTarget t = eight_mixture();
  const Matrix start = random_matrix(6, 2, gen, -4, 4);
  SolverConfig cfg;
  cfg.max_iter = 1;
  cfg.mc_samples = 40;
  const double eta = 0.3;
  const ScheduleSpec schedule{2.0, 0.1, 0.5};
  const RunResult r = explicit_euler_mmd_run(t, schedule, eta, cfg, start_at(start));
  ASSERT_TRUE(r.ok());

  Rng noise_rng = make_stream(cfg.seed, Stream::kMcNoise);
  const McNoise noise = McNoise::draw(40, 2, noise_rng);
  // h_1 = a + b.
  const Matrix grad = grad_free_energy(start, DensityBranch{t, noise}, KernelConfig::gaussian(2.1));
  EXPECT_TRUE(r.particles.positions().isApprox(start - eta * 6.0 * grad, 1e-14));
}

TEST(ExplicitEuler, ZeroGradientLeavesParticlesInPlace) {
  DensityTarget::Callables fns;
  fns.density = [](const Eigen::Ref<const Vector>&) { return 0.0; };
  fns.grad_density = [](const Eigen::Ref<const Vector>& x) -> Vector {
    return Vector::Zero(x.size());
  };
  const DensityTarget flat(Box::cube(1, -1, 1), fns);
  SolverConfig cfg;
  cfg.max_iter = 5;
  // One particle has no self-interaction gradient either.
  const RunResult r = explicit_euler_mmd_run(flat, ScheduleSpec{1.0, 0.1, 0.5}, 0.5, cfg,
                                             start_at(Matrix::Constant(1, 1, 0.25)));
  EXPECT_EQ(r.particles.positions()(0, 0), 0.25);
}

TEST(ExplicitEuler, LinearRateOnQuadraticSurrogate) {
  // The explicit step on a single particle is x <- x - eta * grad E; for a
  // quadratic energy lambda/2 x^2 the recursion is x_n = (1 - eta lambda)^n x_0.
  const double lambda = 0.8, eta = 0.5;
  double x = 2.0;
  for (int n = 1; n <= 10; ++n) {
    x -= eta * lambda * x;
    EXPECT_NEAR(x, 2.0 * std::pow(1 - eta * lambda, n), 1e-14);
  }
}

TEST(ExplicitEuler, EmpiricalBranchRuns) {
  std::mt19937_64 gen(2);
  const EmpiricalTarget data(random_matrix(100, 2, gen), 30);
  SolverConfig cfg;
  cfg.max_iter = 10;
  RunOptions o;
  o.num_particles = 20;
  const RunResult r = explicit_euler_mmd_run(data, ScheduleSpec{}, 1.0, cfg, o);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.record.size(), 10u);
}

Matrix svgd_oracle(const Matrix& x, const DensityTarget& t, double h, double eta) {
  const Eigen::Index n = x.rows();
  Matrix out = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector phi = Vector::Zero(x.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vector xj = x.row(j).transpose();
      const Vector xi = x.row(i).transpose();
      phi += gauss_eval(xj, xi, h) * t.grad_log_density(xj) + gauss_grad_x(xj, xi, h);
    }
    out.row(i) += (eta / static_cast<double>(n)) * phi.transpose();
  }
  return out;
}

TEST(Svgd, StepMatchesDoubleLoop) {
  std::mt19937_64 gen(3);
  const DensityTarget t = star_mixture();
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = random_matrix(3, 2, gen);
    const double h = testing::random_real(0.1, 1.5, gen);
    EXPECT_TRUE(svgd_step(x, t, h, 0.1).isApprox(svgd_oracle(x, t, h, 0.1), 1e-13));
  }
}

TEST(Svgd, SingleParticleAtModeIsStationary) {
  const DensityTarget t = isotropic_gaussian(2, 1.0);
  const Matrix x = Matrix::Zero(1, 2);
  EXPECT_EQ(svgd_step(x, t, 0.1, 0.1), x);
}

TEST(Svgd, SymmetricPairMirrors) {
  const DensityTarget t = isotropic_gaussian(2, 1.0);
  Matrix x(2, 2);
  x << 0.7, -0.3, -0.7, 0.3;
  const Matrix y = svgd_step(x, t, 0.5, 0.2);
  EXPECT_NEAR(y(0, 0), -y(1, 0), 1e-15);
  EXPECT_NEAR(y(0, 1), -y(1, 1), 1e-15);
}

TEST(Svgd, ZeroStepIsIdentity) {
  std::mt19937_64 gen(4);
  SvgdConfig cfg;
  cfg.step = 0.0;
  cfg.max_iter = 5;
  const Matrix start = random_matrix(8, 2, gen);
  const RunResult r = svgd_run(eight_mixture(), cfg, start_at(start));
  EXPECT_EQ(r.particles.positions(), start);
}

TEST(Svgd, RowsFollowStride) {
  SvgdConfig cfg;
  cfg.max_iter = 25;
  RunOptions o;
  o.num_particles = 10;
  o.metrics_stride = 10;
  const RunResult r = svgd_run(eight_mixture(), cfg, o);
  ASSERT_EQ(r.record.size(), 3u);
  EXPECT_EQ(r.record.rows()[0].iteration, 10u);
  EXPECT_EQ(r.record.rows()[2].iteration, 25u);
  EXPECT_EQ(r.record.rows()[2].inner_iterations, 5u);
}

TEST(Lmc, NoNoiseAtModeIsStationary) {
  LmcConfig cfg;
  cfg.inject_noise = false;
  cfg.max_iter = 50;
  const Matrix start = Matrix::Zero(3, 2);
  const RunResult r = lmc_run(isotropic_gaussian(2, 1.0), cfg, start_at(start));
  EXPECT_EQ(r.particles.positions(), start);
}

TEST(Lmc, SeedDeterminesTrajectory) {
  LmcConfig cfg;
  cfg.max_iter = 30;
  RunOptions o;
  o.num_particles = 5;
  const RunResult a = lmc_run(wave_density(), cfg, o);
  const RunResult b = lmc_run(wave_density(), cfg, o);
  EXPECT_EQ(a.particles.positions(), b.particles.positions());
  cfg.seed = 2;
  EXPECT_NE(lmc_run(wave_density(), cfg, o).particles.positions(), a.particles.positions());
}

TEST(Lmc, NoiseStreamDoesNotShiftInitialization) {
  LmcConfig with, without;
  with.max_iter = without.max_iter = 1;
  without.inject_noise = false;
  RunOptions o;
  o.num_particles = 4;
  o.metrics_stride = 1;
  const RunResult a = lmc_run(eight_mixture(), with, o);
  const RunResult b = lmc_run(eight_mixture(), without, o);
  // Same start and drift; only the Gaussian increment differs.
  const double eta = with.schedule.step(1);
  Rng noise = make_stream(with.seed, Stream::kLangevin);
  const Matrix z = standard_normal(4, 2, noise);
  EXPECT_TRUE(a.particles.positions().isApprox(b.particles.positions() + std::sqrt(eta) * z,
                                               1e-13));
}

}  // namespace
}  // namespace evimmd
