#include <doctest.h>

#include "clm/types.hpp"
#include "oracles.hpp"

using namespace clm;

TEST_CASE("partition canonical form") {
  const Partition p = Partition::from_labels({2, 0, 2, 1});
  CHECK(p.item_count() == 4);
  CHECK(p.group_count() == 3);
  CHECK(p.groups() == std::vector<std::vector<int>>{{0, 2}, {1}, {3}});
  CHECK(p.labels() == std::vector<int>{0, 1, 0, 2});
  CHECK(p.group_sizes() == std::vector<int>{2, 1, 1});

  // Group order in the constructor does not matter.
  const Partition q({{3}, {1}, {2, 0}}, 4);
  CHECK(p == q);
  CHECK(Partition::single_group(3).groups() == std::vector<std::vector<int>>{{0, 1, 2}});
}

TEST_CASE("partition validation") {
  CHECK_THROWS_AS(Partition({{0, 1}, {1}}, 2), InvalidPartitionError);   // overlap
  CHECK_THROWS_AS(Partition({{0}, {2}}, 3), InvalidPartitionError);      // gap
  CHECK_THROWS_AS(Partition({{0}, {}}, 1), InvalidPartitionError);       // empty group
  CHECK_THROWS_AS(Partition({{0, 3}}, 2), InvalidPartitionError);        // out of range
  CHECK_THROWS_AS(Partition::from_labels({}), InvalidPartitionError);
}

TEST_CASE("assignment round trip over all small partitions") {
  for (const auto& labels : oracle::all_partitions(5, 3)) {
    const Partition p = Partition::from_labels(labels);
    const Assignment a = partition_to_assignment(p);
    CHECK(a.item_count() == 5);
    CHECK(a.group_count() == p.group_count());
    for (int i = 0; i < 5; ++i) CHECK(a.Z.row(i).sum() == 1.0);
    CHECK(assignment_to_partition(a) == p);
  }
}

TEST_CASE("equivalence matrix entries and projector identities") {
  const Partition p = Partition::from_labels({0, 1, 0, 2});
  const Matrix M = equivalence_from_partition(p);
  Matrix expected(4, 4);
  expected << 0.5, 0, 0.5, 0,  //
      0, 1, 0, 0,              //
      0.5, 0, 0.5, 0,          //
      0, 0, 0, 1;
  CHECK((M - expected).norm() == doctest::Approx(0.0));

  for (const auto& labels : oracle::all_partitions(6, 3)) {
    const Partition q = Partition::from_labels(labels);
    const Matrix E = equivalence_from_partition(q);
    CHECK((E - E.transpose()).norm() < 1e-14);          // symmetric
    CHECK((E * E - E).norm() < 1e-13);                  // idempotent
    CHECK(E.trace() == doctest::Approx(q.group_count()));
    CHECK((E - assignment_to_equivalence(partition_to_assignment(q))).norm() < 1e-14);
  }
}

TEST_CASE("dataset factories validate shapes") {
  Matrix X = Matrix::Zero(3, 2);
  Vector y = Vector::Zero(3);
  const Dataset r = Dataset::regression(X, y);
  CHECK(r.task == TaskKind::Regression);
  CHECK(r.n() == 3);
  CHECK(r.d() == 2);
  CHECK(r.num_targets() == 1);
  CHECK_THROWS_AS(Dataset::regression(X, Vector::Zero(2)), DimensionError);

  const Dataset c = Dataset::classification_from_labels(X, {0, 2, 1}, 3);
  CHECK(c.task == TaskKind::Classification);
  CHECK(c.num_targets() == 3);
  CHECK(c.Y(0, 0) == 1.0);
  CHECK(c.Y(1, 2) == 1.0);
  CHECK(c.Y(2, 1) == 1.0);
  CHECK(c.Y.sum() == 3.0);
  CHECK_THROWS_AS(Dataset::classification_from_labels(X, {0, 3, 1}, 3), InputError);

  const Dataset m = Dataset::multitask(X, Matrix::Zero(3, 4));
  CHECK(m.task == TaskKind::Multitask);
  CHECK(m.num_targets() == 4);
  CHECK_THROWS_AS(Dataset::multitask(X, Matrix::Zero(2, 4)), DimensionError);
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  CHECK_NOTHROW(hp.validate());
  hp.Q = 0;
  CHECK_THROWS_AS(hp.validate(), InputError);
  hp.Q = 3;
  hp.k = 2;  // k < Q cannot host Q distinct values
  CHECK_THROWS_AS(hp.validate(), InputError);
  hp.k = 5;
  CHECK_NOTHROW(hp.validate());
  hp.lambda = -1.0;
  CHECK_THROWS_AS(hp.validate(), InputError);
  hp.lambda = 0.0;
  hp.epsilon = 0.0;  // allowed: disables the small-progress stop
  CHECK_NOTHROW(hp.validate());
  hp.max_iter = 0;
  CHECK_THROWS_AS(hp.validate(), InputError);
}

TEST_CASE("clustered model expands weights") {
  ClusteredLinearModel m;
  m.groups = Partition::from_labels({0, 1, 0});
  m.values = Matrix(2, 1);
  m.values << 2.5, -1.0;
  const Vector w = m.weight_vector();
  CHECK(w[0] == 2.5);
  CHECK(w[1] == -1.0);
  CHECK(w[2] == 2.5);
  CHECK(m.has_distinct_values());
  m.values(1, 0) = 2.5;
  CHECK_FALSE(m.has_distinct_values());
}

TEST_CASE("sample model reshapes stacked experts") {
  SampleClusteredModel m;
  m.groups = Partition::from_labels({0, 1});
  m.num_targets = 2;
  m.experts = Matrix(4, 2);  // d = 2, K = 2, stacked per class
  m.experts << 1, 5, 2, 6, 3, 7, 4, 8;
  const Matrix e0 = m.expert(0);
  CHECK(e0.rows() == 2);
  CHECK(e0.cols() == 2);
  CHECK(e0(0, 0) == 1);
  CHECK(e0(1, 0) == 2);
  CHECK(e0(0, 1) == 3);
  CHECK(e0(1, 1) == 4);
}
