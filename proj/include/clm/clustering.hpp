#pragma once

#include <cstdint>

#include "clm/types.hpp"

namespace clm {

struct KMeansResult {
  Partition partition;  // over rows of the input
  Matrix centroids;     // group_count x p, aligned with partition group order
  double cost;          // within-cluster sum of squared distances
  int iterations;       // Lloyd iterations of the winning restart
};

// Lloyd's algorithm with D^2 seeding. Restart r uses a substream derived from
// (seed, r); the best restart is chosen by (cost, restart index), so the
// result does not depend on the execution schedule. If the input has at most
// Q distinct rows, they become the clusters directly (cost 0).
KMeansResult kmeans_pp(const Matrix& points, int Q, std::uint64_t seed, int restarts = 5);

// Exact minimizer over partitions into at most Q groups; optimal groups are
// contiguous once values are sorted, found by dynamic programming on prefix
// sums in O(m^2 Q). Deterministic: stable sort by (value, index), first-found
// argmin at split ties.
KMeansResult kmeans_1d_exact(const Vector& values, int Q);

namespace detail {

// Nearest-centroid assignment; ties pick the lowest centroid index.
// The two variants must produce identical labels and distances; the serial
// one is the reference the parallel one is tested against.
void assign_nearest_serial(const Matrix& points, const Matrix& centroids,
                           std::vector<int>& labels, Vector& sqdist);
void assign_nearest_parallel(const Matrix& points, const Matrix& centroids,
                             std::vector<int>& labels, Vector& sqdist);

}  // namespace detail

}  // namespace clm
