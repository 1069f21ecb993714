#include <gtest/gtest.h>

#include <cmath>

#include "evimmd/error.hpp"
#include "evimmd/kernels.hpp"
#include "test_support.hpp"

namespace evimmd {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(GaussEval, HandValues) {
  EXPECT_EQ(gauss_eval(vec({0.3, -2}), vec({0.3, -2}), 1.0), 1.0);
  EXPECT_NEAR(gauss_eval(vec({0}), vec({1}), 1.0), 0.6065306597126334, 1e-15);
  for (double h : {0.1, 1.0, 7.5}) {
    EXPECT_NEAR(gauss_eval(vec({0, 0}), vec({h * std::sqrt(2.0), 0}), h),
                0.36787944117144233, 1e-15);
  }
}

TEST(GaussEval, RejectsBadInput) {
  EXPECT_THROW(gauss_eval(vec({0}), vec({1}), 0.0), InvalidArgument);
  EXPECT_THROW(gauss_eval(vec({0}), vec({1, 2}), 1.0), InvalidArgument);
  EXPECT_THROW(gauss_eval(vec({NAN}), vec({1}), 1.0), InvalidArgument);
}

TEST(GaussGrad, HandValuesAndAntisymmetry) {
  EXPECT_EQ(gauss_grad_x(vec({1, 2}), vec({1, 2}), 0.7), Vector::Zero(2));
  EXPECT_NEAR(gauss_grad_x(vec({1}), vec({0}), 1.0)(0), -0.6065306597126334, 1e-15);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Matrix p = testing::random_matrix(2, 3, rng);
    const double h = testing::random_real(0.2, 3.0, rng);
    const Vector g1 = gauss_grad_x(p.row(0).transpose(), p.row(1).transpose(), h);
    const Vector g2 = gauss_grad_x(p.row(1).transpose(), p.row(0).transpose(), h);
    EXPECT_TRUE((g1 + g2).isZero(1e-15));
  }
}

TEST(GaussGrad, MatchesCentralDifferences) {
  std::mt19937_64 rng(12);
  const double step = 1e-5;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = testing::random_size(1, 4, rng);
    const Matrix p = testing::random_matrix(2, d, rng);
    const double h = testing::random_real(0.5, 3.0, rng);
    Vector x = p.row(0).transpose();
    const Vector y = p.row(1).transpose();
    const Vector g = gauss_grad_x(x, y, h);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      Vector xp = x, xm = x;
      xp(k) += step;
      xm(k) -= step;
      const double fd = (gauss_eval(xp, y, h) - gauss_eval(xm, y, h)) / (2 * step);
      EXPECT_LT(testing::rel_err(g(k), fd, 1e-4), 1e-6);
    }
  }
}

TEST(NegEuclid, HandValues) {
  EXPECT_EQ(neg_euclid_eval(vec({2, 2}), vec({2, 2})), 0.0);
  EXPECT_EQ(neg_euclid_eval(vec({0}), vec({3})), -3.0);
  EXPECT_EQ(neg_euclid_eval(vec({0, 0}), vec({3, 4})), -5.0);
  EXPECT_EQ(neg_euclid_grad_x(vec({1, 1}), vec({1, 1})), Vector::Zero(2));
  const Vector g = neg_euclid_grad_x(vec({0, 0}), vec({3, 4}));
  EXPECT_NEAR(g(0), 0.6, 1e-15);
  EXPECT_NEAR(g(1), 0.8, 1e-15);
}

TEST(Gram, SmallCases) {
  const KernelConfig k = KernelConfig::gaussian(1.0);
  EXPECT_EQ(gram(Matrix::Constant(1, 2, 0.4), k), Matrix::Ones(1, 1));
  EXPECT_EQ(gram(Matrix::Constant(2, 3, -1.5), k), Matrix::Ones(2, 2));
}

TEST(Gram, MatchesLoopOracleAndIsSymmetric) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = testing::random_size(1, 8, rng);
    const std::size_t d = testing::random_size(1, 4, rng);
    const Matrix p = testing::random_matrix(n, d, rng);
    const double h = testing::random_real(0.1, 2.0, rng);
    const Matrix g = gram(p, KernelConfig::gaussian(h));
    EXPECT_EQ(g, g.transpose());
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      EXPECT_EQ(g(i, i), 1.0);
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        EXPECT_GT(g(i, j), 0.0);
        EXPECT_LE(g(i, j), 1.0);
        EXPECT_NEAR(g(i, j), testing::gauss_oracle(p, i, p, j, h), 1e-15);
      }
    }
    const Matrix ge = gram(p, KernelConfig::negative_euclidean());
    EXPECT_EQ(ge, ge.transpose());
    for (Eigen::Index i = 0; i < ge.rows(); ++i) {
      for (Eigen::Index j = 0; j < ge.cols(); ++j) {
        EXPECT_NEAR(ge(i, j), -std::sqrt(testing::sq_dist(p, i, p, j)), 1e-14);
      }
    }
  }
}

TEST(CrossGram, MatchesGramAndOracle) {
  std::mt19937_64 rng(14);
  const KernelConfig k = KernelConfig::gaussian(0.8);
  const Matrix a = testing::random_matrix(2, 2, rng);
  const Matrix b = testing::random_matrix(3, 2, rng);
  const Matrix c = cross_gram(a, b, k);
  ASSERT_EQ(c.rows(), 2);
  ASSERT_EQ(c.cols(), 3);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      EXPECT_NEAR(c(i, j), testing::gauss_oracle(a, i, b, j, 0.8), 1e-15);
    }
  }
  EXPECT_TRUE(cross_gram(a, a, k).isApprox(gram(a, k), 1e-15));
  const Matrix one = cross_gram(a.topRows(1), b.topRows(1), k);
  EXPECT_NEAR(one(0, 0), testing::gauss_oracle(a, 0, b, 0, 0.8), 1e-15);
  EXPECT_THROW(cross_gram(a, Matrix::Zero(2, 3), k), InvalidArgument);
}

TEST(SummedGradients, MatchPointwiseSum) {
  std::mt19937_64 rng(15);
  for (const KernelConfig& k : {KernelConfig::gaussian(0.9), KernelConfig::negative_euclidean()}) {
    const Matrix a = testing::random_matrix(4, 3, rng);
    Matrix b = testing::random_matrix(5, 3, rng);
    b.row(2) = a.row(1);  // coincident pair exercises the zero-distance branch
    const Matrix s = summed_gradients(pairwise_with_gradients(a, b, k), a, b);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      Vector want = Vector::Zero(3);
      for (Eigen::Index j = 0; j < b.rows(); ++j) {
        want += kernel_grad_x(a.row(i).transpose(), b.row(j).transpose(), k);
      }
      EXPECT_TRUE(s.row(i).transpose().isApprox(want, 1e-13));
    }
  }
}

}  // namespace
}  // namespace evimmd
