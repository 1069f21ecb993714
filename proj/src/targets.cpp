#include "evimmd/targets.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>

#include "evimmd/error.hpp"

namespace evimmd {

GaussianMixture::GaussianMixture(std::vector<double> weights,
                                 std::vector<Vector> means,
                                 std::vector<Eigen::MatrixXd> covariances)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      covariances_(std::move(covariances)) {
  if (weights_.empty() || weights_.size() != means_.size() ||
      weights_.size() != covariances_.size()) {
    throw InvalidArgument("mixture needs matching non-empty weights/means/covariances");
  }
  dim_ = static_cast<std::size_t>(means_.front().size());
  if (dim_ == 0) throw InvalidArgument("mixture dimension must be positive");

  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("mixture weights must be non-negative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("mixture weights must sum to one");
  }

  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const Eigen::MatrixXd& cov = covariances_[k];
    if (static_cast<std::size_t>(means_[k].size()) != dim_ ||
        static_cast<std::size_t>(cov.rows()) != dim_ ||
        static_cast<std::size_t>(cov.cols()) != dim_) {
      throw InvalidArgument("mixture component dimensions disagree");
    }
    if (!means_[k].allFinite() || !cov.allFinite()) {
      throw InvalidArgument("mixture parameters must be finite");
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
      throw InvalidArgument("mixture covariance must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw InvalidArgument("mixture covariance must be positive definite");
    }
    Eigen::MatrixXd lower = llt.matrixL();
    const double log_det = 2.0 * lower.diagonal().array().log().sum();
    chol_factors_.push_back(lower);
    precisions_.push_back(llt.solve(Eigen::MatrixXd::Identity(
        static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_))));
    log_scale_.push_back(std::log(weights_[k]) -
                         0.5 * static_cast<double>(dim_) * log_two_pi -
                         0.5 * log_det);
  }
}

double GaussianMixture::density(const Eigen::Ref<const Vector>& x) const {
  double total = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0.0) continue;
    const Vector diff = x - means_[k];
    total += std::exp(log_scale_[k] - 0.5 * diff.dot(precisions_[k] * diff));
  }
  return total;
}

Vector GaussianMixture::grad_density(const Eigen::Ref<const Vector>& x) const {
  Vector grad = Vector::Zero(x.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0.0) continue;
    const Vector diff = x - means_[k];
    const Vector z = precisions_[k] * diff;
    grad -= std::exp(log_scale_[k] - 0.5 * diff.dot(z)) * z;
  }
  return grad;
}

Vector GaussianMixture::grad_log_density(const Eigen::Ref<const Vector>& x) const {
  std::vector<double> logs(weights_.size(), -INFINITY);
  std::vector<Vector> zs(weights_.size());
  double peak = -INFINITY;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0.0) continue;
    const Vector diff = x - means_[k];
    zs[k] = precisions_[k] * diff;
    logs[k] = log_scale_[k] - 0.5 * diff.dot(zs[k]);
    peak = std::max(peak, logs[k]);
  }
  Vector grad = Vector::Zero(x.size());
  double norm = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0.0) continue;
    const double r = std::exp(logs[k] - peak);
    norm += r;
    grad -= r * zs[k];
  }
  return grad / norm;
}

void GaussianMixture::evaluate(const Matrix& points, Vector& values,
                               Matrix* gradients) const {
  const Eigen::Index n = points.rows();
  values.setZero(n);
  if (gradients != nullptr) gradients->setZero(n, points.cols());
  Matrix diff(n, points.cols());
  Matrix z(n, points.cols());
  Eigen::ArrayXd w(n);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0.0) continue;
    diff = points.rowwise() - means_[k].transpose();
    z.noalias() = diff * precisions_[k];
    w = (log_scale_[k] - 0.5 * (diff.array() * z.array()).rowwise().sum()).exp();
    values.array() += w;
    if (gradients != nullptr) {
      gradients->array() -= z.array().colwise() * w;
    }
  }
}

Vector GaussianMixture::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  std::size_t chosen = 0;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0.0) continue;
    chosen = k;
    cumulative += weights_[k];
    if (u < cumulative) break;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(static_cast<Eigen::Index>(dim_));
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(rng);
  return means_[chosen] + chol_factors_[chosen] * z;
}

Matrix mixture_sampler(const GaussianMixture& mixture, std::size_t n, Rng& rng) {
  if (n < 1) throw InvalidArgument("mixture_sampler needs n >= 1");
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(mixture.dim()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = mixture.sample(rng).transpose();
  }
  return out;
}

DensityTarget make_mixture_target(const GaussianMixture& mixture, Box domain) {
  if (domain.dim() != mixture.dim()) {
    throw InvalidArgument("domain and mixture dimensions differ");
  }
  auto m = std::make_shared<const GaussianMixture>(mixture);
  DensityTarget::Callables fns;
  fns.density = [m](const Eigen::Ref<const Vector>& x) { return m->density(x); };
  fns.grad_density = [m](const Eigen::Ref<const Vector>& x) {
    return m->grad_density(x);
  };
  fns.grad_log_density = [m](const Eigen::Ref<const Vector>& x) {
    return m->grad_log_density(x);
  };
  fns.batch = [m](const Matrix& p, Vector& v, Matrix* g) { m->evaluate(p, v, g); };
  fns.exact_sampler = [m](Rng& rng) { return m->sample(rng); };
  return DensityTarget(std::move(domain), std::move(fns));
}

GaussianMixture star_mixture_model() {
  const double angle = 2.0 * std::numbers::pi / 5.0;
  Eigen::Matrix2d rotation;
  rotation << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  Eigen::Matrix2d base_cov = Eigen::Vector2d(1.0, 0.01).asDiagonal();
  Eigen::Vector2d base_mean(1.5, 0.0);

  std::vector<double> weights(5, 0.2);
  std::vector<Vector> means;
  std::vector<Eigen::MatrixXd> covs;
  Eigen::Matrix2d power = Eigen::Matrix2d::Identity();
  for (int i = 0; i < 5; ++i) {
    means.emplace_back(power * base_mean);
    Eigen::Matrix2d cov = power * base_cov * power.transpose();
    cov = 0.5 * (cov + cov.transpose());
    covs.emplace_back(cov);
    power = rotation * power;
  }
  return GaussianMixture(std::move(weights), std::move(means), std::move(covs));
}

GaussianMixture eight_mixture_model() {
  const double centres[8][2] = {{0, 4},     {2.8, 2.8},   {4, 0},  {-2.8, 2.8},
                                {-4, 0},    {-2.8, -2.8}, {0, -4}, {2.8, -2.8}};
  std::vector<double> weights(8, 0.125);
  std::vector<Vector> means;
  std::vector<Eigen::MatrixXd> covs;
  for (const auto& c : centres) {
    means.emplace_back(Eigen::Vector2d(c[0], c[1]));
    covs.emplace_back(0.2 * Eigen::MatrixXd::Identity(2, 2));
  }
  return GaussianMixture(std::move(weights), std::move(means), std::move(covs));
}

DensityTarget star_mixture() {
  return make_mixture_target(star_mixture_model(), Box::cube(2, -2.0, 2.0));
}

DensityTarget eight_mixture() {
  return make_mixture_target(eight_mixture_model(), Box::cube(2, -4.0, 4.0));
}

namespace {

constexpr double kWaveNormalizer = 9.93;

double wave_exponent(double x1, double x2) {
  const double r = x2 - std::sin(std::numbers::pi * x1);
  return -0.1 * x1 * x1 - r * r;
}

// d/dx of the exponent.
Vector wave_exponent_grad(double x1, double x2) {
  const double pi = std::numbers::pi;
  const double r = x2 - std::sin(pi * x1);
  Vector g(2);
  g << -0.2 * x1 + 2.0 * r * pi * std::cos(pi * x1), -2.0 * r;
  return g;
}

}  // namespace

DensityTarget wave_density() {
  DensityTarget::Callables fns;
  fns.density = [](const Eigen::Ref<const Vector>& x) {
    return std::exp(wave_exponent(x(0), x(1))) / kWaveNormalizer;
  };
  fns.grad_density = [](const Eigen::Ref<const Vector>& x) {
    const double rho = std::exp(wave_exponent(x(0), x(1))) / kWaveNormalizer;
    return Vector(rho * wave_exponent_grad(x(0), x(1)));
  };
  fns.grad_log_density = [](const Eigen::Ref<const Vector>& x) {
    return wave_exponent_grad(x(0), x(1));
  };
  fns.batch = [](const Matrix& p, Vector& values, Matrix* grads) {
    const double pi = std::numbers::pi;
    const Eigen::ArrayXd x1 = p.col(0).array();
    const Eigen::ArrayXd r = p.col(1).array() - (pi * x1).sin();
    values = ((-0.1 * x1.square() - r.square()).exp() / kWaveNormalizer).matrix();
    if (grads != nullptr) {
      grads->resize(p.rows(), 2);
      grads->col(0) = (values.array() *
                       (-0.2 * x1 + 2.0 * pi * r * (pi * x1).cos())).matrix();
      grads->col(1) = (values.array() * (-2.0 * r)).matrix();
    }
  };
  // x1 ~ N(0, 5) and x2 | x1 ~ N(sin(pi x1), 1/2) reproduce the shape exactly.
  fns.exact_sampler = [](Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x(2);
    x(0) = std::sqrt(5.0) * normal(rng);
    x(1) = std::sin(std::numbers::pi * x(0)) + std::sqrt(0.5) * normal(rng);
    return x;
  };
  return DensityTarget(Box::cube(2, -3.0, 3.0), std::move(fns));
}

DensityTarget isotropic_gaussian(std::size_t d, double sigma) {
  if (d < 1) throw InvalidArgument("isotropic_gaussian needs d >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("isotropic_gaussian needs sigma > 0");
  }
  const double var = sigma * sigma;
  const double log_norm =
      -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * var);

  DensityTarget::Callables fns;
  fns.density = [=](const Eigen::Ref<const Vector>& x) {
    return std::exp(log_norm - 0.5 * x.squaredNorm() / var);
  };
  fns.grad_density = [=](const Eigen::Ref<const Vector>& x) {
    const double rho = std::exp(log_norm - 0.5 * x.squaredNorm() / var);
    return Vector(-x * (rho / var));
  };
  fns.grad_log_density = [=](const Eigen::Ref<const Vector>& x) {
    return Vector(-x / var);
  };
  fns.batch = [=](const Matrix& p, Vector& values, Matrix* grads) {
    values = (log_norm - 0.5 * p.rowwise().squaredNorm().array() / var).exp().matrix();
    if (grads != nullptr) {
      *grads = -(p.array().colwise() * (values.array() / var)).matrix();
    }
  };
  fns.exact_sampler = [=](Rng& rng) {
    std::normal_distribution<double> normal(0.0, sigma);
    Vector x(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = normal(rng);
    return x;
  };
  return DensityTarget(Box::cube(d, -2.0, 2.0), std::move(fns));
}

}  // namespace evimmd
