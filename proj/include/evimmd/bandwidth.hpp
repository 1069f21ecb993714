#pragma once

#include <cstddef>

#include "evimmd/model.hpp"

namespace evimmd {

/// h_n = a / n^c + b for outer iteration n >= 1.
double bandwidth_at(const BandwidthSchedule& schedule, std::size_t n);

/// Median of the N(N-1)/2 distances |x_i - x_j|, i < j. With an even count
/// the two central order statistics are averaged. Requires N >= 2.
double median_pairwise_distance(const Matrix& points);

}  // namespace evimmd
