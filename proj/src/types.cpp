#include "clm/types.hpp"

#include <algorithm>
#include <cmath>

namespace clm {

namespace {

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + " contains NaN or Inf");
}

}  // namespace

// ---------------------------------------------------------------------------
// Partition
// ---------------------------------------------------------------------------

Partition::Partition(std::vector<std::vector<int>> groups, int item_count)
    : item_count_(item_count) {
  if (item_count <= 0) throw InvalidPartitionError("partition needs at least one item");
  std::vector<char> seen(item_count, 0);
  for (auto& g : groups) {
    if (g.empty()) throw InvalidPartitionError("empty group");
    for (int i : g) {
      if (i < 0 || i >= item_count) throw InvalidPartitionError("index out of range");
      if (seen[i]) throw InvalidPartitionError("index appears in two groups");
      seen[i] = 1;
    }
    std::sort(g.begin(), g.end());
  }
  for (int i = 0; i < item_count; ++i)
    if (!seen[i]) throw InvalidPartitionError("index missing from partition");
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  groups_ = std::move(groups);
  labels_.assign(item_count, -1);
  for (int q = 0; q < static_cast<int>(groups_.size()); ++q)
    for (int i : groups_[q]) labels_[i] = q;
}

Partition Partition::from_labels(const std::vector<int>& labels) {
  if (labels.empty()) throw InvalidPartitionError("partition needs at least one item");
  std::vector<std::vector<int>> groups;
  std::vector<std::pair<int, int>> label_to_group;  // (label, group index)
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    int g = -1;
    for (auto& [lab, idx] : label_to_group)
      if (lab == labels[i]) g = idx;
    if (g < 0) {
      g = static_cast<int>(groups.size());
      label_to_group.emplace_back(labels[i], g);
      groups.emplace_back();
    }
    groups[g].push_back(i);
  }
  return Partition(std::move(groups), static_cast<int>(labels.size()));
}

Partition Partition::single_group(int item_count) {
  std::vector<int> all(item_count);
  for (int i = 0; i < item_count; ++i) all[i] = i;
  return Partition({all}, item_count);
}

std::vector<int> Partition::group_sizes() const {
  std::vector<int> s(groups_.size());
  for (std::size_t q = 0; q < groups_.size(); ++q) s[q] = static_cast<int>(groups_[q].size());
  return s;
}

// ---------------------------------------------------------------------------
// Assignment / equivalence matrix
// ---------------------------------------------------------------------------

Assignment::Assignment(Matrix z) : Z(std::move(z)) {
  if (Z.rows() < 1 || Z.cols() < 1) throw InvalidPartitionError("assignment matrix is empty");
  for (int i = 0; i < Z.rows(); ++i) {
    int ones = 0;
    for (int q = 0; q < Z.cols(); ++q) {
      double v = Z(i, q);
      if (v != 0.0 && v != 1.0) throw InvalidPartitionError("assignment entries must be 0 or 1");
      ones += v == 1.0;
    }
    if (ones != 1) throw InvalidPartitionError("each row must select exactly one group");
  }
}

Assignment partition_to_assignment(const Partition& p) {
  Matrix Z = Matrix::Zero(p.item_count(), p.group_count());
  for (int i = 0; i < p.item_count(); ++i) Z(i, p.labels()[i]) = 1.0;
  return Assignment(std::move(Z));
}

Partition assignment_to_partition(const Assignment& a) {
  std::vector<int> labels(a.item_count());
  for (int i = 0; i < a.item_count(); ++i)
    for (int q = 0; q < a.group_count(); ++q)
      if (a.Z(i, q) == 1.0) labels[i] = q;
  return Partition::from_labels(labels);
}

Matrix assignment_to_equivalence(const Assignment& a) {
  // Empty columns drop out of Z(Z^T Z)^{-1}Z^T; going through the partition
  // does that implicitly and gives the exact 1/s_q entries.
  return equivalence_from_partition(assignment_to_partition(a));
}

Matrix equivalence_from_partition(const Partition& p) {
  const int m = p.item_count();
  Matrix M = Matrix::Zero(m, m);
  for (const auto& g : p.groups()) {
    const double w = 1.0 / static_cast<double>(g.size());
    for (int i : g)
      for (int j : g) M(i, j) = w;
  }
  return M;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

Dataset Dataset::regression(Matrix X, Vector y) {
  if (X.rows() < 1 || X.cols() < 1) throw DimensionError("X must be nonempty");
  if (y.size() != X.rows()) throw DimensionError("y length must match rows of X");
  check_finite(X, "X");
  check_finite(y, "y");
  Dataset ds;
  ds.X = std::move(X);
  ds.y = std::move(y);
  ds.task = TaskKind::Regression;
  return ds;
}

Dataset Dataset::classification(Matrix X, Matrix Y_onehot) {
  if (X.rows() < 1 || X.cols() < 1) throw DimensionError("X must be nonempty");
  if (Y_onehot.rows() != X.rows()) throw DimensionError("Y rows must match rows of X");
  if (Y_onehot.cols() < 2) throw DimensionError("classification needs at least two classes");
  check_finite(X, "X");
  for (int i = 0; i < Y_onehot.rows(); ++i) {
    int ones = 0;
    for (int k = 0; k < Y_onehot.cols(); ++k) {
      double v = Y_onehot(i, k);
      if (v != 0.0 && v != 1.0) throw InputError("class indicator rows must be one-hot");
      ones += v == 1.0;
    }
    if (ones != 1) throw InputError("class indicator rows must sum to 1");
  }
  Dataset ds;
  ds.X = std::move(X);
  ds.Y = std::move(Y_onehot);
  ds.task = TaskKind::Classification;
  return ds;
}

Dataset Dataset::classification_from_labels(Matrix X, const std::vector<int>& labels,
                                            int num_classes) {
  if (static_cast<int>(labels.size()) != X.rows())
    throw DimensionError("label count must match rows of X");
  Matrix Y = Matrix::Zero(X.rows(), num_classes);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw InputError("class label out of range");
    Y(i, labels[i]) = 1.0;
  }
  return classification(std::move(X), std::move(Y));
}

Dataset Dataset::multitask(Matrix X, Matrix Y) {
  if (X.rows() < 1 || X.cols() < 1) throw DimensionError("X must be nonempty");
  if (Y.rows() != X.rows()) throw DimensionError("Y rows must match rows of X");
  if (Y.cols() < 1) throw DimensionError("multitask needs at least one task");
  check_finite(X, "X");
  check_finite(Y, "Y");
  Dataset ds;
  ds.X = std::move(X);
  ds.Y = std::move(Y);
  ds.task = TaskKind::Multitask;
  return ds;
}

// ---------------------------------------------------------------------------
// Hyperparams / models
// ---------------------------------------------------------------------------

void Hyperparams::validate() const {
  if (Q < 1) throw InputError("Q must be >= 1");
  if (k && *k < 0) throw InputError("k must be >= 0");
  if (k && *k < Q) throw InputError("k >= Q required: fewer nonzeros than groups is infeasible");
  if (lambda < 0 || lambda_M < 0 || lambda_B < 0 || lambda_W < 0)
    throw InputError("penalty weights must be >= 0");
  if (epsilon < 0) throw InputError("epsilon must be >= 0");
  if (max_iter < 1) throw InputError("max_iter must be >= 1");
}

Matrix ClusteredLinearModel::weights() const {
  if (values.rows() != groups.group_count())
    throw DimensionError("values rows must match group count");
  Matrix W(groups.item_count(), values.cols());
  for (int i = 0; i < groups.item_count(); ++i) W.row(i) = values.row(groups.labels()[i]);
  return W;
}

Vector ClusteredLinearModel::weight_vector() const {
  if (values.cols() != 1) throw DimensionError("weight_vector requires a single target");
  return weights().col(0);
}

bool ClusteredLinearModel::has_distinct_values(double tol) const {
  for (int a = 0; a < values.rows(); ++a)
    for (int b = a + 1; b < values.rows(); ++b)
      if ((values.row(a) - values.row(b)).lpNorm<Eigen::Infinity>() <= tol) return false;
  return true;
}

Matrix SampleClusteredModel::expert(int q) const {
  if (q < 0 || q >= groups.group_count()) throw InputError("expert index out of range");
  const int d = static_cast<int>(experts.rows()) / num_targets;
  Matrix E(d, num_targets);
  for (int k = 0; k < num_targets; ++k) E.col(k) = experts.col(q).segment(k * d, d);
  return E;
}

}  // namespace clm
