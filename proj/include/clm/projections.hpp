#pragma once

#include <cstdint>

#include "clm/types.hpp"

namespace clm {

struct ProjectionResult {
  Vector w;
  std::vector<int> support;                      // ascending original indices
  std::vector<std::vector<int>> support_groups;  // partition of the support
  std::vector<double> barycenters;               // one per group
  double distance2 = 0.0;                        // ||x - w||^2
};

enum class ClusterProjMode { Exact1d, KMeansPP };

// Rows of W are replaced by at most Q shared rows. Exact1d requires a single
// column and is a true projection; KMeansPP is the Lloyd approximation.
struct ClusteredProjection {
  Assignment Z;  // m x Q'
  Matrix V;      // Q' x p
  Matrix W_hat;  // Z * V
  double distance2;
};
ClusteredProjection project_clustered(const Matrix& W, int Q, ClusterProjMode mode,
                                      std::uint64_t seed, int restarts = 5);

// Keeps the k entries of largest magnitude (threshold ties keep the lower
// index) and zeroes the rest.
ProjectionResult project_ksparse(const Vector& x, int k);

// Dynamic program over prefixes of an ascending-sorted vector. f(j,q) is the
// largest sum_p s_p mu_p^2 over partitions of the j smallest values into
// exactly q groups whose barycenters are all strictly negative
// (-inf when infeasible). start and mu describe the last group of the
// maximizer for backtracking. Cost O(k^2 Q).
struct NegDPTables {
  int points;  // table rows span 0..points
  int groups;  // table cols span 0..groups
  Matrix f;
  Eigen::MatrixXi start;  // 1-based first position of the last group
  Matrix mu;              // barycenter of the last group
};
NegDPTables negative_side_dp(const Vector& x_sorted, int k, int Q);

// Exact Euclidean projection onto vectors with at most k nonzeros carrying at
// most Q distinct values. Two one-sided dynamic programs (negative side on
// the sorted vector, positive side on its negation) are combined by a grid
// search over the split of the budget; objective ties prefer smaller support,
// then fewer negative groups.
ProjectionResult project_sparse_clustered(const Vector& x, int k, int Q);

}  // namespace clm
