#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "evimmd/model.hpp"

namespace evimmd {

/// Shortest-safe text for a double: 17 significant digits, so parsing the
/// result gives back the same bits. Non-finite values print as nan/inf/-inf.
std::string format_real(double value);

/// Reads a `dim_0,...,dim_{d-1}` CSV into an M x d matrix. Particle files
/// are accepted too: `iter` and `particle_id` columns are skipped.
/// Throws IoError, or ParseError carrying the 1-based file line.
Matrix read_matrix_csv(const std::filesystem::path& path);

/// read_matrix_csv wrapped as an empirical target; minibatch 0 means M.
EmpiricalTarget load_dataset_csv(const std::filesystem::path& path,
                                 std::size_t minibatch_size = 0);

/// Header `iter,particle_id,dim_0,...`, one row per particle.
void write_particles(const ParticleSet& particles, const std::filesystem::path& path);

/// Plain sample matrix with header `dim_0,...`.
void write_matrix_csv(const Matrix& points, const std::filesystem::path& path);

inline constexpr std::string_view kRunRecordHeader =
    "iter,h_n,free_energy,mmd2_eval,energy_dist_eval,inner_iters,displacement";

void write_run_record(const RunRecord& record, const std::filesystem::path& path);
RunRecord read_run_record(const std::filesystem::path& path);

}  // namespace evimmd
