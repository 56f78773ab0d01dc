#include <doctest.h>

#include <random>

#include "clm/rng.hpp"
#include "clm/theory.hpp"
#include "oracles.hpp"

using namespace clm;

namespace {

Matrix random_matrix(int r, int c, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

Matrix scaled_orthonormal(int n, std::uint64_t seed) {
  const Matrix Q = Eigen::HouseholderQR<Matrix>(random_matrix(n, n, seed)).householderQ();
  return std::sqrt(static_cast<double>(n)) * Q;
}

}  // namespace

TEST_CASE("stirling numbers match the recurrence") {
  for (int d = 0; d <= 10; ++d)
    for (int q = 0; q <= d; ++q) CHECK(stirling2(d, q) == oracle::stirling_ref(d, q));
  CHECK(stirling2(25, 12) == oracle::stirling_ref(25, 12));
  CHECK_THROWS_AS(stirling2(26, 2), EnumerationLimitError);
}

TEST_CASE("binomial coefficients are exact") {
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(20, 10) == 184756);
  CHECK(binomial(5, 6) == 0);
}

TEST_CASE("partition enumeration has the right counts and members") {
  const auto all4 = enumerate_partitions(4);
  CHECK(all4.size() == 15);  // Bell(4)
  for (const auto& p : all4) CHECK(p.item_count() == 4);

  const auto exact53 = enumerate_partitions_exact(5, 3);
  CHECK(exact53.size() == oracle::stirling_ref(5, 3));
  for (const auto& p : exact53) CHECK(p.group_count() == 3);

  std::uint64_t capped = 0;
  for (int q = 1; q <= 2; ++q) capped += oracle::stirling_ref(6, q);
  CHECK(enumerate_partitions(6, 2).size() == capped);

  CHECK_THROWS_AS(enumerate_partitions(13), EnumerationLimitError);
}

TEST_CASE("partition subspace bases are orthonormal and span the right set") {
  const Partition p = Partition::from_labels({0, 1, 0, 2, 1});
  const Matrix B = partition_subspace_basis(p);
  CHECK(B.cols() == 3);
  CHECK((B.transpose() * B - Matrix::Identity(3, 3)).norm() < 1e-13);

  // Any vector with shared values inside groups is reproduced exactly.
  Vector w(5);
  w << 2.0, -1.0, 2.0, 0.5, -1.0;
  CHECK((B * (B.transpose() * w) - w).norm() < 1e-12);
}

TEST_CASE("sum-of-subspaces basis has the rank of the stacked indicators") {
  const Partition a = Partition::from_labels({0, 0, 1, 1, 2, 2});
  const Partition b = Partition::from_labels({0, 1, 0, 1, 0, 1});
  const Matrix S = sum_subspace_basis({a, b});
  CHECK((S.transpose() * S - Matrix::Identity(S.cols(), S.cols())).norm() < 1e-12);

  Matrix stacked(6, 5);
  stacked.leftCols(3) = partition_to_assignment(a).Z;
  stacked.rightCols(2) = partition_to_assignment(b).Z;
  CHECK(S.cols() == stacked.fullPivLu().rank());

  // Vectors feasible for either partition live inside the sum.
  Vector w(6);
  w << 3, 3, -2, -2, 7, 7;  // constant on groups of a
  CHECK((S * (S.transpose() * w) - w).norm() < 1e-11);
}

TEST_CASE("candidate constants match direct spectral norms") {
  const Matrix X = random_matrix(12, 5, 601);
  const Matrix G = X.transpose() * X;
  const double n = 12.0;
  const Partition a = Partition::from_labels({0, 0, 1, 1, 1});
  const Partition b = Partition::from_labels({0, 1, 0, 1, 0});
  const Partition c = Partition::from_labels({0, 1, 1, 0, 0});

  const Matrix Pi3 = sum_subspace_basis({a, b, c});
  const Matrix inner3 =
      Matrix::Identity(Pi3.cols(), Pi3.cols()) - Pi3.transpose() * (G / n) * Pi3;
  CHECK(detail::rho_candidate(G, n, a, b, c) ==
        doctest::Approx(2.0 * oracle::spectral_norm_ref(inner3)).epsilon(1e-10));

  const Matrix Pi2 = sum_subspace_basis({a, b});
  CHECK(detail::nu_candidate(G, n, a, b) ==
        doctest::Approx((2.0 / n) * oracle::spectral_norm_ref(X * Pi2)).epsilon(1e-10));
}

TEST_CASE("contraction constants in closed-form cases") {
  SUBCASE("orthonormal design contracts in one step") {
    const Matrix X = scaled_orthonormal(4, 611);
    const ContractionReport r = contraction_constants(X, 2);
    CHECK(r.exact);
    CHECK(r.rho == doctest::Approx(0.0));
    CHECK(r.nu == doctest::Approx(2.0 / std::sqrt(4.0)));
    CHECK(r.subspaces == oracle::stirling_ref(4, 2));
    const std::uint64_t N = r.subspaces;
    CHECK(r.pairs == N * (N + 1) / 2);
    CHECK(r.triples == N * (N + 1) * (N + 2) / 6);
  }
  SUBCASE("zero design gives the worst contraction and no noise amplification") {
    const ContractionReport r = contraction_constants(Matrix::Zero(6, 4), 2);
    CHECK(r.rho == doctest::Approx(2.0));
    CHECK(r.nu == doctest::Approx(0.0));
  }
}

TEST_CASE("subsampled constants lower-bound the exact sweep deterministically") {
  const Matrix X = random_matrix(30, 6, 621);
  const ContractionReport exact = contraction_constants(X, 2);

  ContractionOptions opt;
  opt.subsample = 12;
  opt.seed = 3;
  const ContractionReport sub = contraction_constants(X, 2, opt);
  CHECK_FALSE(sub.exact);
  CHECK(sub.rho <= exact.rho + 1e-12);
  CHECK(sub.nu <= exact.nu + 1e-12);

  const ContractionReport sub2 = contraction_constants(X, 2, opt);
  CHECK(sub.rho == sub2.rho);
  CHECK(sub.nu == sub2.nu);
}

TEST_CASE("serial and parallel sweeps agree bitwise") {
  const Matrix X = random_matrix(15, 5, 631);
  ContractionOptions par, ser;
  ser.parallel = false;
  const ContractionReport a = contraction_constants(X, 2, par);
  const ContractionReport b = contraction_constants(X, 2, ser);
  CHECK(a.rho == b.rho);
  CHECK(a.nu == b.nu);
  CHECK(a.triples == b.triples);
}

TEST_CASE("the error bound holds on a well-conditioned design") {
  const Matrix X = scaled_orthonormal(5, 641);
  Vector w_star(5);
  w_star << 1, 1, -1, -1, 1;
  const ConvergenceCheck c = verify_convergence_bound(X, w_star, 0.1, 2, 8, 17);
  CHECK(c.bound_holds);
  CHECK(c.errors.size() == 9);
  CHECK(c.errors[0] == doctest::Approx(w_star.norm()));
  CHECK(c.constants.rho == doctest::Approx(0.0));
  // After the first step only the noise term remains.
  for (std::size_t t = 1; t < c.bounds.size(); ++t)
    CHECK(c.bounds[t] == doctest::Approx(c.constants.nu * c.noise_norm));
}

TEST_CASE("stirling envelope and sparse pattern count") {
  for (int d = 1; d <= 10; ++d)
    for (int q = 1; q <= d; ++q) {
      const StirlingBounds b = stirling_bounds(d, q);
      CHECK(b.value == oracle::stirling_ref(d, q));
      CHECK(b.simple_holds);
      CHECK(b.lower_simple <= static_cast<double>(b.value));
      CHECK(static_cast<double>(b.value) <= b.upper);
      if (d > q)  // the refined lower bound needs at least one extra item
        CHECK(b.lower_refined <= static_cast<double>(b.value));
    }

  for (int d = 6; d <= 12; ++d)
    for (int k = 3; k <= 6; ++k)
      for (int q = 3; q <= k; ++q) {
        const SparseCountBound s = sparse_subspace_count(d, k, q);
        CHECK(s.count == binomial(d, k) * oracle::stirling_ref(k, q));
        CHECK(s.holds);
      }
}
