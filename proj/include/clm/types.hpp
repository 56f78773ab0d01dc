#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors. InputError descendants map to CLI exit code 1, DivergedError to 2.
// ---------------------------------------------------------------------------

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : InputError {
  using InputError::InputError;
};

struct InvalidPartitionError : InputError {
  using InputError::InputError;
};

struct UnsupportedModeError : InputError {
  using InputError::InputError;
};

// Thrown instead of attempting a combinatorial sweep that cannot finish.
struct EnumerationLimitError : InputError {
  using InputError::InputError;
};

struct IllConditionedError : std::runtime_error {
  IllConditionedError(const std::string& what, double cond)
      : std::runtime_error(what), condition_estimate(cond) {}
  double condition_estimate;
};

struct DivergedError : std::runtime_error {
  DivergedError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), objective_trace(std::move(trace)) {}
  std::vector<double> objective_trace;
};

struct CvFailedError : std::runtime_error {
  CvFailedError(const std::string& what, std::string method_name)
      : std::runtime_error(what), method(std::move(method_name)) {}
  std::string method;
};

// ---------------------------------------------------------------------------
// Partition of {0..m-1} into nonempty groups, kept in canonical form:
// groups ordered by smallest member, members sorted ascending.
// ---------------------------------------------------------------------------

class Partition {
 public:
  Partition() = default;  // empty partition of zero items
  Partition(std::vector<std::vector<int>> groups, int item_count);

  // Compresses arbitrary labels; group identity is by first occurrence.
  static Partition from_labels(const std::vector<int>& labels);

  static Partition single_group(int item_count);

  int item_count() const { return item_count_; }
  int group_count() const { return static_cast<int>(groups_.size()); }
  const std::vector<std::vector<int>>& groups() const { return groups_; }
  const std::vector<int>& labels() const { return labels_; }
  std::vector<int> group_sizes() const;

  bool operator==(const Partition& other) const = default;

 private:
  std::vector<std::vector<int>> groups_;
  std::vector<int> labels_;  // item -> canonical group index
  int item_count_ = 0;
};

// Binary assignment matrix Z (m x Q), one 1 per row. Stored dense double so
// it can enter matrix algebra directly.
struct Assignment {
  Matrix Z;
  explicit Assignment(Matrix z);
  int item_count() const { return static_cast<int>(Z.rows()); }
  int group_count() const { return static_cast<int>(Z.cols()); }
};

Assignment partition_to_assignment(const Partition& p);
Partition assignment_to_partition(const Assignment& a);

// M = Z (Z^T Z)^{-1} Z^T; empty columns of Z are dropped first.
// M_ij = 1/s_q when i,j share group q, else 0.
Matrix assignment_to_equivalence(const Assignment& a);
Matrix equivalence_from_partition(const Partition& p);

// ---------------------------------------------------------------------------
// Dataset. Regression holds y; classification holds one-hot Y; multitask
// holds a dense real target matrix Y.
// ---------------------------------------------------------------------------

enum class TaskKind { Regression, Classification, Multitask };

struct Dataset {
  Matrix X;  // n x d
  Vector y;  // n (regression); empty otherwise
  Matrix Y;  // n x K (classification one-hot or multitask targets)
  TaskKind task = TaskKind::Regression;

  static Dataset regression(Matrix X, Vector y);
  static Dataset classification(Matrix X, Matrix Y_onehot);
  // Builds one-hot rows from integer class labels in [0, num_classes).
  static Dataset classification_from_labels(Matrix X, const std::vector<int>& labels,
                                            int num_classes);
  static Dataset multitask(Matrix X, Matrix Y);

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  int num_targets() const { return task == TaskKind::Regression ? 1 : static_cast<int>(Y.cols()); }
};

// ---------------------------------------------------------------------------
// Hyperparameters shared across solvers.
// ---------------------------------------------------------------------------

struct Hyperparams {
  int Q = 1;                  // group budget
  std::optional<int> k;       // sparsity budget; unset = dense
  double lambda = 0.0;        // ridge weight
  double lambda_M = 0.0;      // multitask: mean penalty
  double lambda_B = 0.0;      // multitask: between-cluster penalty
  double lambda_W = 0.0;      // multitask: within-cluster penalty
  double epsilon = 1e-8;      // stopping threshold
  int max_iter = 500;
  std::uint64_t rng_seed = 0;
  bool fit_intercept = false;  // unpenalized, excluded from clustering

  void validate() const;
};

// ---------------------------------------------------------------------------
// Models.
// ---------------------------------------------------------------------------

// w = Z v: every feature carries one of Q' shared values (columns = targets).
struct ClusteredLinearModel {
  Partition groups;  // over features
  Matrix values;     // Q' x K
  double intercept = 0.0;

  Matrix weights() const;        // d x K
  Vector weight_vector() const;  // requires K == 1
  // True when no two groups share an identical value row (tolerance tol).
  bool has_distinct_values(double tol = 0.0) const;
};

// One expert per sample group; classification experts are stacked per class.
struct SampleClusteredModel {
  Matrix experts;    // d x Q' (regression) or (d*K) x Q' (classification)
  Partition groups;  // over training samples
  int num_targets = 1;

  Matrix expert(int q) const;  // d x num_targets
};

// k-sparse weight vector whose support carries at most Q distinct values.
struct SparseClusteredModel {
  Vector w;
  std::vector<int> support;                      // ascending
  std::vector<std::vector<int>> support_groups;  // partition of support
  std::vector<double> barycenters;               // one per group
};

}  // namespace clm
