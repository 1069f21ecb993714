#include "evimmd/free_energy.hpp"

#include <cmath>
#include <numbers>

#include "evimmd/error.hpp"
#include "evimmd/kernels.hpp"
#include "evimmd/random.hpp"

namespace evimmd {

McNoise::McNoise(Matrix xi) : xi_(std::move(xi)) {
  if (xi_.rows() < 1 || xi_.cols() < 1) {
    throw InvalidArgument("Monte-Carlo noise needs L >= 1 and d >= 1");
  }
  if (!xi_.allFinite()) throw InvalidArgument("Monte-Carlo noise must be finite");
}

McNoise McNoise::draw(std::size_t samples, std::size_t dim, Rng& rng) {
  return McNoise(standard_normal(samples, dim, rng));
}

namespace {

double gaussian_normalizer(std::size_t d, double h) {
  return std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(d)) *
         std::pow(h, static_cast<double>(d));
}

// Sum of a matrix in row-major traversal order. Used for every double sum so
// the reduction order is fixed.
double ordered_sum(const Matrix& m) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) row += m(i, j);
    total += row;
  }
  return total;
}

struct CrossTerm {
  double value;
  Matrix gradient;  // d(value)/d particles; empty when not requested
};

CrossTerm density_cross(const Matrix& particles, const DensityTarget& target,
                        const KernelConfig& kernel, const McNoise& noise,
                        bool with_gradient) {
  if (kernel.kind() != KernelKind::kGaussian) {
    throw Unsupported(
        "density-branch cross term requires the Gaussian kernel");
  }
  if (noise.dim() != static_cast<std::size_t>(particles.cols()) ||
      target.dim() != static_cast<std::size_t>(particles.cols())) {
    throw InvalidArgument("noise, target and particle dimensions differ");
  }
  if (with_gradient && !target.has_gradient()) {
    throw Unsupported("density target has no gradient callable");
  }
  const double h = kernel.bandwidth();
  const Eigen::Index n = particles.rows();
  const Eigen::Index samples = static_cast<Eigen::Index>(noise.size());
  const Eigen::Index d = particles.cols();

  // Row i * L + l holds x_i + h xi_l.
  Matrix probes(n * samples, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    probes.middleRows(i * samples, samples) =
        (h * noise.xi()).rowwise() + particles.row(i);
  }
  Vector values;
  Matrix grads;
  target.evaluate(probes, values, with_gradient ? &grads : nullptr);

  const double scale =
      gaussian_normalizer(static_cast<std::size_t>(d), h) / static_cast<double>(samples);
  CrossTerm out{0.0, {}};
  if (with_gradient) out.gradient.setZero(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index l = 0; l < samples; ++l) row += values(i * samples + l);
    out.value += scale * row;
    if (with_gradient) {
      for (Eigen::Index l = 0; l < samples; ++l) {
        out.gradient.row(i) += grads.row(i * samples + l);
      }
      out.gradient.row(i) *= scale;
    }
  }
  return out;
}

CrossTerm empirical_cross(const Matrix& particles, const Matrix& batch,
                          const KernelConfig& kernel, bool with_gradient) {
  if (batch.rows() < 1) throw InvalidArgument("mini-batch must not be empty");
  const PairwiseKernel pk = pairwise_with_gradients(particles, batch, kernel);
  const double inv_batch = 1.0 / static_cast<double>(batch.rows());
  CrossTerm out{inv_batch * ordered_sum(pk.values), {}};
  if (with_gradient) out.gradient = inv_batch * summed_gradients(pk, particles, batch);
  return out;
}

double evaluate(const Matrix& particles, const TargetBranch& branch,
                const KernelConfig& kernel, Matrix* gradient) {
  const bool with_gradient = gradient != nullptr;
  const CrossTerm cross = std::visit(
      [&](const auto& b) -> CrossTerm {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, DensityBranch>) {
          return density_cross(particles, b.target, kernel, b.noise, with_gradient);
        } else {
          return empirical_cross(particles, b.batch, kernel, with_gradient);
        }
      },
      branch);

  const double n = static_cast<double>(particles.rows());
  const PairwiseKernel self = pairwise_with_gradients(particles, particles, kernel);
  const double square = ordered_sum(self.values) / (n * n);
  if (with_gradient) {
    *gradient = (2.0 / (n * n)) * summed_gradients(self, particles, particles) -
                (2.0 / n) * cross.gradient;
  }
  return -(2.0 / n) * cross.value + square;
}

}  // namespace

double square_term(const Matrix& particles, const KernelConfig& kernel) {
  const double n = static_cast<double>(particles.rows());
  return ordered_sum(gram(particles, kernel)) / (n * n);
}

double cross_term_density(const Matrix& particles, const DensityTarget& target,
                          double h, const McNoise& noise) {
  return density_cross(particles, target, KernelConfig::gaussian(h), noise, false)
      .value;
}

double cross_term_empirical(const Matrix& particles, const Matrix& batch,
                            const KernelConfig& kernel) {
  return empirical_cross(particles, batch, kernel, false).value;
}

double free_energy(const Matrix& particles, const TargetBranch& branch,
                   const KernelConfig& kernel) {
  return evaluate(particles, branch, kernel, nullptr);
}

Matrix grad_free_energy(const Matrix& particles, const TargetBranch& branch,
                        const KernelConfig& kernel) {
  Matrix gradient;
  evaluate(particles, branch, kernel, &gradient);
  return gradient;
}

double free_energy_and_gradient(const Matrix& particles, const TargetBranch& branch,
                                const KernelConfig& kernel, Matrix& gradient) {
  return evaluate(particles, branch, kernel, &gradient);
}

}  // namespace evimmd
