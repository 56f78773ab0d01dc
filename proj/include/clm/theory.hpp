#pragma once

#include <cstdint>
#include <vector>

#include "clm/types.hpp"

namespace clm {

// S(d, Q): partitions of d items into exactly Q nonempty groups. Overflows
// past d = 25 are rejected (EnumerationLimitError).
std::uint64_t stirling2(int d, int Q);
std::uint64_t binomial(int n, int k);

// All set partitions of {0..m-1} (optionally into at most max_groups), via
// restricted-growth strings in lexicographic order. Refuses to materialize
// more than about a million partitions.
std::vector<Partition> enumerate_partitions(int m, int max_groups = -1);
std::vector<Partition> enumerate_partitions_exact(int m, int Q);

// Orthonormal basis of {w = Z v} for one partition: indicator columns scaled
// by 1/sqrt(group size).
Matrix partition_subspace_basis(const Partition& p);
// Orthonormal basis of the sum of several such subspaces (rank-revealing QR
// of the concatenated indicator columns).
Matrix sum_subspace_basis(const std::vector<Partition>& ps);

// Contraction and noise constants of the clustered-projection gradient
// scheme:
//   rho = 2 max_{U in E3} || I - Pi_U^T (X^T X / n) Pi_U ||_2
//   nu  = (2/n) max_{U in E2} || X Pi_U ||_2
// where E2 / E3 run over sums of two / three subspaces induced by partitions
// of the features into exactly Q groups (repetition allowed, so smaller sums
// are covered).
struct ContractionOptions {
  // > 0: estimate from this many sampled partitions instead of enumerating
  int subsample = 0;
  std::uint64_t seed = 0;
  std::uint64_t max_combinations = 2'000'000;
  bool parallel = true;  // serial path kept as the reference for testing
};

struct ContractionReport {
  double rho = 0.0;
  double nu = 0.0;
  bool exact = true;             // false for subsampled estimates (lower bounds)
  std::uint64_t subspaces = 0;   // partitions considered
  std::uint64_t pairs = 0;
  std::uint64_t triples = 0;
};

ContractionReport contraction_constants(const Matrix& X, int Q,
                                        const ContractionOptions& opt = {});

// Runs the unit-step projected-gradient scheme (zero start, exact projection,
// no regularization) on y = X w_star + eta with eta ~ N(0, sigma^2 I), and
// compares ||w_t - w_star|| against
//   rho^t ||w_star|| + (sum_{s<t} rho^s) nu ||eta||.
struct ConvergenceCheck {
  ContractionReport constants;
  std::vector<double> errors;  // t = 0..T
  std::vector<double> bounds;
  double noise_norm = 0.0;
  bool bound_holds = false;
};

ConvergenceCheck verify_convergence_bound(const Matrix& X, const Vector& w_star, double sigma,
                                          int Q, int iterations, std::uint64_t seed,
                                          const ContractionOptions& opt = {});

// Two-sided envelope for the number of Q-group partitions of d features.
struct StirlingBounds {
  std::uint64_t value = 0;      // S(d, Q)
  double lower_simple = 0.0;    // Q^{d-Q}
  double lower_refined = 0.0;   // (Q^2+Q+2)/2 * Q^{d-Q-1} - 1, valid for d > Q
  double upper = 0.0;           // (1/2) (e d/Q)^Q Q^{d-Q}
  bool simple_holds = false;    // lower_simple <= S(d,Q) <= upper
};
StirlingBounds stirling_bounds(int d, int Q);

// Number of distinct k-sparse Q-clustered weight patterns, C(d,k) S(k,Q),
// against the envelope d^k k^Q Q^{k-Q} (meaningful for k, Q >= 3).
struct SparseCountBound {
  std::uint64_t count = 0;
  double bound = 0.0;
  bool holds = false;
};
SparseCountBound sparse_subspace_count(int d, int k, int Q);

namespace detail {

// Per-combination candidates; the sweep in contraction_constants evaluates
// these in parallel into per-index slots and reduces serially.
double rho_candidate(const Matrix& G, double n, const Partition& a, const Partition& b,
                     const Partition& c);
double nu_candidate(const Matrix& G, double n, const Partition& a, const Partition& b);

}  // namespace detail

}  // namespace clm
