#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "clm/solver_report.hpp"
#include "clm/types.hpp"

namespace clm {

// The set of equivalence matrices M = Z (Z^T Z)^{-1} Z^T over partitions into
// at most Q groups is relaxed to its convex hull. The ridge objective
// minimized over weights consistent with a fixed partition has the closed
// form psi below, which is convex in M, so conditional gradient applies with
// a clustering problem as the linear oracle.
enum class RelaxKind {
  FeatureRegression,      // M over features, psi(M) = y^T (I + X M X^T/(n l))^{-1} y / 2n
  FeatureClassification,  // same A, summed over target columns
  SampleRegression,       // M over samples, psi(M) = y^T (I + (XX^T o M)/(n l))^{-1} y / 2n
  SampleClassification
};

struct PsiProblem {
  RelaxKind kind;
  Matrix X;       // n x d
  Matrix T;       // targets, n x K (K = 1 for regression)
  double lambda;  // must be positive: psi divides by it

  static PsiProblem from_dataset(const Dataset& data, bool over_samples, double lambda);
  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  bool over_samples() const {
    return kind == RelaxKind::SampleRegression || kind == RelaxKind::SampleClassification;
  }
  int m() const { return over_samples() ? n() : d(); }  // side of M
};

// Value, and the gradient in factored form: grad psi(M) = -P with P = F F^T.
// The dense P is materialized only on request (gradient checks).
struct PsiEval {
  double value = 0.0;
  Matrix factor;  // m x r
  Matrix P;       // m x m, empty unless requested
};
double psi_value(const PsiProblem& problem, const Matrix& M);
PsiEval psi_eval(const PsiProblem& problem, const Matrix& M, bool want_full = false);

// argmax_N <N, F F^T> over equivalence matrices of partitions into at most Q
// groups. Group means realize the inner product, so this is k-means on the
// rows of F: exact for one column, Lloyd with restarts otherwise.
Partition linear_oracle_factor(const Matrix& F, int Q, std::uint64_t seed, int restarts = 5);
// Same oracle from a dense PSD matrix: factorize by eigendecomposition
// (eigenvalues below max * 1e-12 are dropped), then cluster.
Partition linear_oracle(const Matrix& P, int Q, std::uint64_t seed, int restarts = 5);

// <equivalence(p), F F^T> = sum_q s_q ||mean of F rows over group q||^2.
double equivalence_inner_factor(const Partition& p, const Matrix& F);

struct CGConfig {
  int Q = 1;
  double lambda = 1e-3;  // ridge weight; the relaxation needs lambda > 0
  // Duality-gap threshold; nonpositive means 1e-6 * max(1, psi(M_0)).
  double epsilon = 0.0;
  int max_iter = 200;
  std::uint64_t seed = 0;
  int restarts = 5;             // k-means restarts inside the oracle
  bool record_oracle_psi = false;  // also evaluate psi at every oracle vertex
};

struct CGResult {
  Partition partition;  // rounding: the last oracle vertex
  Matrix M;             // final relaxed iterate
  SolverReport report;  // objective_trace = psi(M_t), fw_gaps, step_sizes
  std::vector<double> oracle_psi;  // psi at each vertex (when recorded)
  // Set when an approximate oracle returned a vertex worse than the iterate
  // (gap visibly negative); the run continues but the gap lost its
  // certificate meaning.
  bool oracle_warning = false;
  std::optional<ClusteredLinearModel> feature_model;
  std::optional<SampleClusteredModel> sample_model;
};

// Frank-Wolfe with the open-loop schedule alpha_t = 2/(t+2) from the
// single-group matrix, stopped on the duality gap; the returned model refits
// ridge weights exactly on the rounded partition.
CGResult cg_fit(const Dataset& data, bool over_samples, const CGConfig& config);

// Exact ridge refit on a fixed partition (also used by the experiment
// harness to evaluate candidate partitions).
ClusteredLinearModel refit_feature_partition(const Dataset& data, const Partition& groups,
                                             double lambda);
SampleClusteredModel refit_sample_partition(const Dataset& data, const Partition& groups,
                                            double lambda);

}  // namespace clm
