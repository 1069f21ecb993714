#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "evimmd/error.hpp"
#include "evimmd/metrics.hpp"
#include "evimmd/random.hpp"
#include "evimmd/targets.hpp"
#include "test_support.hpp"

namespace evimmd {
namespace {

// Midpoint rule over [lo, hi]^2.
double integrate_2d(const DensityTarget& t, double lo, double hi, int cells) {
  const double step = (hi - lo) / cells;
  double sum = 0.0;
  Vector x(2);
  for (int i = 0; i < cells; ++i) {
    x(0) = lo + (i + 0.5) * step;
    for (int j = 0; j < cells; ++j) {
      x(1) = lo + (j + 0.5) * step;
      sum += t.density(x);
    }
  }
  return sum * step * step;
}

void expect_gradient_matches_fd(const DensityTarget& t, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix probes = uniform_in_box(t.domain(), 100, rng);
  const double step = 1e-5;
  for (Eigen::Index p = 0; p < probes.rows(); ++p) {
    const Vector x = probes.row(p).transpose();
    const Vector g = t.grad_density(x);
    const double scale = std::max(g.cwiseAbs().maxCoeff(), t.density(x));
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      Vector xp = x, xm = x;
      xp(k) += step;
      xm(k) -= step;
      const double fd = (t.density(xp) - t.density(xm)) / (2 * step);
      EXPECT_LT(std::abs(g(k) - fd) / std::max(scale, 1e-12), 1e-5)
          << "probe " << p << " coord " << k;
    }
  }
}

void expect_positive_on_box(const DensityTarget& t, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix probes = uniform_in_box(t.domain(), 500, rng);
  for (Eigen::Index p = 0; p < probes.rows(); ++p) {
    EXPECT_GT(t.density(probes.row(p).transpose()), 0.0);
  }
  // The box corners are the farthest points from the mass.
  const Vector lo = t.domain().lower();
  const Vector hi = t.domain().upper();
  EXPECT_GT(t.density(lo), 0.0);
  EXPECT_GT(t.density(hi), 0.0);
}

void expect_batch_matches_pointwise(const DensityTarget& t, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix pts = uniform_in_box(t.domain(), 40, rng);
  Vector values;
  Matrix grads;
  t.evaluate(pts, values, &grads);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const Vector x = pts.row(i).transpose();
    EXPECT_NEAR(values(i), t.density(x), 1e-15 + 1e-12 * t.density(x));
    EXPECT_TRUE(grads.row(i).transpose().isApprox(t.grad_density(x), 1e-11) ||
                (grads.row(i).transpose() - t.grad_density(x)).norm() < 1e-15);
  }
}

TEST(StarMixture, ParametersFromTheConstruction) {
  const GaussianMixture m = star_mixture_model();
  ASSERT_EQ(m.components(), 5u);
  EXPECT_NEAR(m.means()[0](0), 1.5, 1e-15);
  EXPECT_NEAR(m.means()[0](1), 0.0, 1e-15);
  EXPECT_NEAR(m.covariances()[0](0, 0), 1.0, 1e-15);
  EXPECT_NEAR(m.covariances()[0](1, 1), 0.01, 1e-15);
  EXPECT_NEAR(m.covariances()[0](0, 1), 0.0, 1e-15);
  // Component k is component 0 rotated by 2 pi k / 5.
  const double angle = 2 * std::numbers::pi / 5;
  EXPECT_NEAR(m.means()[1](0), 1.5 * std::cos(angle), 1e-14);
  EXPECT_NEAR(m.means()[1](1), 1.5 * std::sin(angle), 1e-14);
  for (const auto& c : m.covariances()) EXPECT_EQ(c, c.transpose());
}

TEST(StarMixture, IntegratesToOne) {
  EXPECT_NEAR(integrate_2d(star_mixture(), -8, 8, 1600), 1.0, 1e-3);
}

TEST(EightMixture, ParametersAndModeDominance) {
  const GaussianMixture m = eight_mixture_model();
  ASSERT_EQ(m.components(), 8u);
  EXPECT_NEAR(m.means()[1](0), 2.8, 1e-15);
  EXPECT_NEAR(m.means()[1](1), 2.8, 1e-15);
  EXPECT_EQ(m.covariances()[0], (Eigen::MatrixXd(2, 2) << 0.2, 0, 0, 0.2).finished());
  const DensityTarget t = eight_mixture();
  EXPECT_GT(t.density((Vector(2) << 0, 4).finished()),
            1e3 * t.density((Vector(2) << 0, 0).finished()));
  EXPECT_NEAR(integrate_2d(t, -8, 8, 800), 1.0, 1e-3);
}

TEST(WaveDensity, HandValuesAndMass) {
  const DensityTarget t = wave_density();
  EXPECT_NEAR(t.density(Vector::Zero(2)), 1.0 / 9.93, 1e-15);
  EXPECT_NEAR(1.0 / 9.93, 0.100705, 1e-6);
  EXPECT_EQ(t.grad_density(Vector::Zero(2))(1), 0.0);
  EXPECT_NEAR(integrate_2d(t, -10, 10, 2000), 1.0, 0.02);
}

TEST(IsotropicGaussian, HandValuesAndSamplerMean) {
  const DensityTarget t = isotropic_gaussian(1, 1.0);
  EXPECT_NEAR(t.density(Vector::Zero(1)), 0.3989422804014327, 1e-15);
  EXPECT_EQ(t.grad_density(Vector::Zero(1)), Vector::Zero(1));
  const DensityTarget t3 = isotropic_gaussian(3, 1.0);
  Rng rng(7);
  const Matrix s = t3.sample(100000, rng);
  const Vector mean = s.colwise().mean().transpose();
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.02);
  EXPECT_THROW(isotropic_gaussian(0, 1.0), InvalidArgument);
  EXPECT_THROW(isotropic_gaussian(2, 0.0), InvalidArgument);
}

TEST(BuiltinTargets, GradientMatchesFiniteDifferences) {
  expect_gradient_matches_fd(star_mixture(), 1);
  expect_gradient_matches_fd(eight_mixture(), 2);
  expect_gradient_matches_fd(wave_density(), 3);
  expect_gradient_matches_fd(isotropic_gaussian(4, 0.7), 4);
}

TEST(BuiltinTargets, StrictlyPositiveOnDomain) {
  expect_positive_on_box(star_mixture(), 5);
  expect_positive_on_box(eight_mixture(), 6);
  expect_positive_on_box(wave_density(), 7);
  expect_positive_on_box(isotropic_gaussian(5, 1.0), 8);
}

TEST(BuiltinTargets, BatchPathMatchesPointwise) {
  expect_batch_matches_pointwise(star_mixture(), 9);
  expect_batch_matches_pointwise(eight_mixture(), 10);
  expect_batch_matches_pointwise(wave_density(), 11);
  expect_batch_matches_pointwise(isotropic_gaussian(3, 1.3), 12);
}

TEST(GaussianMixture, GradLogIsStableInTheTails) {
  const GaussianMixture m = eight_mixture_model();
  const Vector far = (Vector(2) << 60.0, -45.0).finished();
  const Vector g = m.grad_log_density(far);
  ASSERT_TRUE(g.allFinite());
  // Far away the nearest component dominates: grad log = -(x - mu) / 0.2.
  const Vector mu = m.means()[7];  // (2.8, -2.8)
  EXPECT_TRUE(g.isApprox(-(far - mu) / 0.2, 1e-6));
}

TEST(GaussianMixture, RejectsBadParameters) {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  const Vector zero = Vector::Zero(2);
  EXPECT_THROW(GaussianMixture({0.5, 0.6}, {zero, zero}, {eye, eye}), InvalidArgument);
  EXPECT_THROW(GaussianMixture({-0.5, 1.5}, {zero, zero}, {eye, eye}), InvalidArgument);
  Eigen::MatrixXd not_spd = eye;
  not_spd(1, 1) = -1;
  EXPECT_THROW(GaussianMixture({1.0}, {zero}, {not_spd}), InvalidArgument);
  Eigen::MatrixXd asym = eye;
  asym(0, 1) = 0.5;
  EXPECT_THROW(GaussianMixture({1.0}, {zero}, {asym}), InvalidArgument);
}

TEST(MixtureSampler, DegenerateWeightsUseOneComponent) {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2) * 0.01;
  const GaussianMixture m({1.0, 0.0}, {Vector::Constant(2, 5.0), Vector::Constant(2, -5.0)},
                          {eye, eye});
  Rng rng(3);
  const Matrix s = mixture_sampler(m, 1000, rng);
  EXPECT_GT(s.col(0).minCoeff(), 3.0);
}

TEST(MixtureSampler, EightModesAreEquallyVisited) {
  const GaussianMixture m = eight_mixture_model();
  Rng rng(4);
  const Matrix s = mixture_sampler(m, 100000, rng);
  for (double f : mode_occupancy(s, m.means())) EXPECT_NEAR(f, 0.125, 0.005);
}

TEST(MixtureSampler, SeedDeterminesDraws) {
  const GaussianMixture m = star_mixture_model();
  Rng a(99), b(99);
  EXPECT_EQ(mixture_sampler(m, 50, a), mixture_sampler(m, 50, b));
}

}  // namespace
}  // namespace evimmd
