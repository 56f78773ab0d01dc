#pragma once

#include <cstdint>
#include <optional>

#include "clm/solver_report.hpp"
#include "clm/types.hpp"

namespace clm {

// Ridge for (1/2n)||Xw - y||^2 + (lambda/2)||w||^2. With lambda = 0 and a
// rank-deficient design the minimum-norm solution is returned.
Vector fit_ls(const Dataset& data, double lambda);

// Multi-target version sharing one factorization; columns of Y are fitted
// independently.
Matrix fit_ls_multi(const Matrix& X, const Matrix& Y, double lambda);

// Ridge followed by exact 1-d clustering of the weights into Q shared values.
ClusteredLinearModel fit_lsk(const Dataset& data, int Q, double lambda);

// Alternating minimization for sample-clustered regression: exact per-group
// ridge, then reassignment of each sample to the group minimizing its own
// objective share (loss plus (lambda/2)||v_q||^2). Groups emptied by a
// reassignment are reseeded with the worst-fit sample and refitted, which
// keeps the objective nonincreasing.
struct AlternatingResult {
  SampleClusteredModel model;
  std::vector<double> objective_trace;  // after every alternation
  int alternations = 0;
  bool converged = false;  // assignments stable before the cap
};
AlternatingResult fit_alternating_sample(const Dataset& data, int Q, double lambda,
                                         std::uint64_t seed,
                                         const std::optional<Partition>& init = std::nullopt,
                                         int max_alternations = 100);

// Iterative hard thresholding: gradient step on the ridge objective followed
// by the k-sparse projection, with the shared backtracking contract.
struct IHTResult {
  Vector w;
  SolverReport report;
};
IHTResult fit_iht(const Dataset& data, int k, double lambda,
                  const LineSearchParams& line_search = {}, double epsilon = 1e-8,
                  int max_iter = 500);

}  // namespace clm
