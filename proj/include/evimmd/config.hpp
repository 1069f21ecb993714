#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evimmd {

enum class Method { kEviMmd, kExplicitMmd, kEnergyDistance, kSvgd, kLmc };
enum class TargetKind { kStar, kEight, kWave, kGaussian, kCsv };

std::string_view method_name(Method m);
std::string_view target_name(TargetKind t);

struct TargetSpec {
  TargetKind kind = TargetKind::kEight;
  /// Dimension and scale of the isotropic Gaussian target.
  std::size_t dim = 2;
  double sigma = 1.0;
  /// Dataset path for the csv target.
  std::string path;
  /// Size of the generated training set whenever a synthetic target is used
  /// through its samples (two-sample methods on gaussian, energy distance).
  std::size_t train_size = 50000;
};

/// Grid axes; every non-empty axis is crossed with the others.
struct SweepSpec {
  std::vector<double> a;
  std::vector<double> c;
  std::vector<double> tau_star;
  std::vector<std::size_t> dim;

  bool empty() const { return a.empty() && c.empty() && tau_star.empty() && dim.empty(); }
};

struct ExperimentConfig {
  Method method = Method::kEviMmd;
  TargetSpec target;

  std::size_t num_particles = 200;
  std::size_t max_iter = 5000;
  std::size_t mc_samples = 500;
  double tau_star = 2.0;  // defaults to the target dimension

  std::optional<double> a;  // nullopt means "auto"
  double b = 0.1;
  double c = 0.5;

  double step_size = 0.1;  // SVGD step, or explicit-Euler step (defaults to tau_star)
  double bandwidth = 0.1;  // SVGD kernel bandwidth
  double lmc_a = 0.1;
  double lmc_b = 1.0;
  double lmc_c = 0.55;

  std::size_t lbfgs_memory = 10;
  std::size_t lbfgs_max_inner = 50;
  double lbfgs_grad_tol = 1e-6;

  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::size_t metrics_stride = 1;  // 100 for svgd and lmc
  std::size_t reference_samples = 2000;
  double eval_bandwidth = 0.5;
  std::vector<std::size_t> snapshots;  // default {50, 500, max_iter}
  bool strict_deterministic = false;

  SweepSpec sweep;

  // Set when the value was defaulted, so sweep cells re-derive it.
  bool tau_star_follows_dim = false;
  bool step_follows_tau = false;
};

/// Parses and validates a YAML config, filling defaults. Unknown keys are
/// rejected with a spelling suggestion. `EVI_MMD_SEED`, when set, replaces
/// the seed. Throws IoError, ParseError or ValidationError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view text);

/// YAML text that parse_config turns back into `config`.
std::string dump_config(const ExperimentConfig& config);

/// Re-checks field constraints; throws ValidationError naming the field.
void validate(const ExperimentConfig& config);

/// Closest accepted key within edit distance 2, if any.
std::optional<std::string> suggest_key(std::string_view key,
                                       const std::vector<std::string>& known);

}  // namespace evimmd
