#include "evimmd/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "evimmd/error.hpp"

namespace evimmd {

double bandwidth_at(const BandwidthSchedule& schedule, std::size_t n) {
  if (n < 1) throw InvalidArgument("bandwidth schedule is indexed from n = 1");
  return schedule.a() / std::pow(static_cast<double>(n), schedule.c()) + schedule.b();
}

double median_pairwise_distance(const Matrix& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw InvalidArgument("median pairwise distance needs N >= 2");
  if (!points.allFinite()) throw InvalidArgument("points must be finite");

  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back(std::sqrt(std::max((points.row(i) - points.row(j)).squaredNorm(), 0.0)));
    }
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  const double upper = dist[mid];
  if (dist.size() % 2 == 1) return upper;
  const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace evimmd
