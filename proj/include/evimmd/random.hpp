#pragma once

#include <cstdint>

#include "evimmd/model.hpp"

namespace evimmd {

/// Independent randomness sources of a run. Each one gets its own engine
/// derived from the master seed, so turning one source on or off never shifts
/// the draws of another.
enum class Stream : std::uint64_t {
  kInit = 1,
  kMcNoise = 2,
  kMiniBatch = 3,
  kLangevin = 4,
  kReference = 5,
  kTraining = 6,
};

Rng make_stream(std::uint64_t master_seed, Stream stream);

Matrix uniform_in_box(const Box& box, std::size_t n, Rng& rng);
Matrix standard_normal(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace evimmd
