#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <string_view>

#include "evimmd/config.hpp"
#include "evimmd/model.hpp"

namespace evimmd {

enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kIo = 3,
  kNumerical = 4,
};

/// Maps a library exception to the CLI exit code.
ExitCode exit_code_for(const std::exception& e);

/// Exact samples from a named synthetic target (star, eight, wave, gaussian),
/// drawn from the reference stream of `seed`.
Matrix sample_named_target(std::string_view name, std::size_t n, std::uint64_t seed,
                           std::size_t gaussian_dim = 2, double gaussian_sigma = 1.0);

/// Runs the configured method (or every sweep cell) and writes into
/// `config.output_dir`:
///   resolved_config.yaml, run_record.csv, particles_iter_<n>.csv for
///   n = 0 and each snapshot, particles_final.csv;
/// a sweep writes one cell_<k>/ directory per grid point plus
/// sweep_summary.csv. Progress and diagnostics go to `log`.
/// Never throws for run-time failures; they are reported through the code.
ExitCode run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace evimmd
