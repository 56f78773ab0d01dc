#include "clm/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "clm/parallel.hpp"
#include "clm/pgd.hpp"
#include "clm/rng.hpp"

namespace clm {

namespace {

constexpr std::uint64_t kMaxMaterialized = 1'000'000;

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    throw EnumerationLimitError(what);
  return a * b;
}

}  // namespace

std::uint64_t stirling2(int d, int Q) {
  if (d < 0 || Q < 0) throw InputError("counts must be nonnegative");
  // the Bell number B(25) still fits in 64 bits, so no intermediate can wrap
  if (d > 25) throw EnumerationLimitError("S(d, Q) overflows past d = 25");
  if (Q > d) return 0;
  if (d == 0) return Q == 0 ? 1 : 0;
  if (Q == 0) return 0;
  // S(d, Q) = Q S(d-1, Q) + S(d-1, Q-1), row by row
  std::vector<std::uint64_t> row(Q + 1, 0);
  row[0] = 1;  // S(0, 0)
  for (int i = 1; i <= d; ++i) {
    for (int q = std::min(i, Q); q >= 1; --q)
      row[q] = checked_mul(row[q], q, "S(d, Q) overflows") + (q - 1 <= i - 1 ? row[q - 1] : 0);
    row[0] = 0;
  }
  return row[Q];
}

std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0) throw InputError("counts must be nonnegative");
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = checked_mul(r, static_cast<std::uint64_t>(n - k + i), "binomial overflows");
    r /= i;  // exact: r holds C(n-k+i, i) after the division
  }
  return r;
}

namespace {

void enumerate_rgs(int m, int cap, int exact_groups, std::vector<Partition>& out) {
  std::vector<int> labels(m, 0);
  // labels[i] <= 1 + max(labels[0..i-1]), capped: restricted growth strings
  auto rec = [&](auto&& self, int i, int used) -> void {
    if (i == m) {
      if (exact_groups < 0 || used == exact_groups) out.push_back(Partition::from_labels(labels));
      return;
    }
    const int top = std::min(used, cap - 1);
    for (int g = 0; g <= top; ++g) {
      labels[i] = g;
      self(self, i + 1, std::max(used, g + 1));
    }
  };
  rec(rec, 0, 0);
}

}  // namespace

std::vector<Partition> enumerate_partitions(int m, int max_groups) {
  if (m < 1) throw InputError("need at least one item");
  const int cap = max_groups < 0 ? m : std::min(m, max_groups);
  if (cap < 1) throw InputError("need at least one group");
  std::uint64_t count = 0;
  for (int q = 1; q <= cap; ++q) count += stirling2(m, q);
  if (count > kMaxMaterialized)
    throw EnumerationLimitError("too many partitions to materialize");
  std::vector<Partition> out;
  out.reserve(count);
  enumerate_rgs(m, cap, -1, out);
  return out;
}

std::vector<Partition> enumerate_partitions_exact(int m, int Q) {
  if (m < 1) throw InputError("need at least one item");
  if (Q < 1 || Q > m) throw InputError("group count must be in [1, item count]");
  if (stirling2(m, Q) > kMaxMaterialized)
    throw EnumerationLimitError("too many partitions to materialize");
  std::vector<Partition> out;
  out.reserve(stirling2(m, Q));
  enumerate_rgs(m, Q, Q, out);
  return out;
}

Matrix partition_subspace_basis(const Partition& p) {
  Matrix B = Matrix::Zero(p.item_count(), p.group_count());
  for (int q = 0; q < p.group_count(); ++q) {
    const auto& g = p.groups()[q];
    const double v = 1.0 / std::sqrt(static_cast<double>(g.size()));
    for (int i : g) B(i, q) = v;
  }
  return B;
}

Matrix sum_subspace_basis(const std::vector<Partition>& ps) {
  if (ps.empty()) throw InputError("need at least one partition");
  const int d = ps.front().item_count();
  int cols = 0;
  for (const auto& p : ps) {
    if (p.item_count() != d) throw DimensionError("partitions cover different item counts");
    cols += p.group_count();
  }
  Matrix B(d, cols);
  int c = 0;
  for (const auto& p : ps) {
    B.middleCols(c, p.group_count()) = partition_subspace_basis(p);
    c += p.group_count();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(B);
  const int rank = static_cast<int>(qr.rank());
  Matrix Qfull = qr.householderQ();
  return Qfull.leftCols(rank);
}

namespace detail {

double rho_candidate(const Matrix& G, double n, const Partition& a, const Partition& b,
                     const Partition& c) {
  const Matrix Pi = sum_subspace_basis({a, b, c});
  const Matrix M =
      Matrix::Identity(Pi.cols(), Pi.cols()) - Pi.transpose() * G * Pi / n;
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return 2.0 * std::max(std::abs(lo), std::abs(hi));
}

double nu_candidate(const Matrix& G, double n, const Partition& a, const Partition& b) {
  const Matrix Pi = sum_subspace_basis({a, b});
  const Matrix M = Pi.transpose() * G * Pi;
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return 2.0 * std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())) / n;
}

}  // namespace detail

namespace {

std::vector<Partition> sample_exact_partitions(int d, int Q, int count, std::uint64_t seed) {
  std::vector<Partition> out;
  out.reserve(count);
  std::vector<int> order(d);
  for (int s = 0; s < count; ++s) {
    auto rng = make_rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    for (int i = 0; i < d; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<int> pick(0, Q - 1);
    std::vector<int> labels(d);
    // first Q shuffled items pin one group each; the rest fall uniformly
    for (int i = 0; i < d; ++i) labels[order[i]] = i < Q ? i : pick(rng);
    out.push_back(Partition::from_labels(labels));
  }
  return out;
}

template <typename Body>
void run_sweep(bool parallel, std::int64_t count, const Body& body) {
  if (parallel)
    parallel_for(count, body);
  else
    serial_for(count, body);
}

// first index wins ties, independent of the sweep schedule
double max_of(const std::vector<double>& vals) {
  double best = -std::numeric_limits<double>::infinity();
  for (double v : vals) best = std::max(best, v);
  return best;
}

}  // namespace

ContractionReport contraction_constants(const Matrix& X, int Q, const ContractionOptions& opt) {
  const int d = static_cast<int>(X.cols());
  const double n = static_cast<double>(X.rows());
  if (X.rows() < 1) throw InputError("need at least one sample");
  if (Q < 1 || Q > d) throw InputError("group count must be in [1, d]");
  const Matrix G = X.transpose() * X;

  ContractionReport rep;
  std::vector<Partition> parts;
  if (opt.subsample > 0) {
    rep.exact = false;
    parts = sample_exact_partitions(d, Q, opt.subsample, opt.seed);
  } else {
    parts = enumerate_partitions_exact(d, Q);
  }
  const std::uint64_t N = parts.size();
  rep.subspaces = N;
  rep.pairs = N * (N + 1) / 2;
  rep.triples = N * (N + 1) * (N + 2) / 6;
  if (rep.pairs + rep.triples > opt.max_combinations)
    throw EnumerationLimitError(
        "too many subspace combinations; use subsampling for a lower bound");

  std::vector<std::array<int, 2>> pairs;
  pairs.reserve(rep.pairs);
  for (int i = 0; i < static_cast<int>(N); ++i)
    for (int j = i; j < static_cast<int>(N); ++j) pairs.push_back({i, j});
  std::vector<std::array<int, 3>> triples;
  triples.reserve(rep.triples);
  for (int i = 0; i < static_cast<int>(N); ++i)
    for (int j = i; j < static_cast<int>(N); ++j)
      for (int k = j; k < static_cast<int>(N); ++k) triples.push_back({i, j, k});

  std::vector<double> nu_vals(pairs.size());
  run_sweep(opt.parallel, static_cast<std::int64_t>(pairs.size()), [&](std::int64_t idx) {
    const auto& [i, j] = pairs[idx];
    nu_vals[idx] = detail::nu_candidate(G, n, parts[i], parts[j]);
  });
  std::vector<double> rho_vals(triples.size());
  run_sweep(opt.parallel, static_cast<std::int64_t>(triples.size()), [&](std::int64_t idx) {
    const auto& [i, j, k] = triples[idx];
    rho_vals[idx] = detail::rho_candidate(G, n, parts[i], parts[j], parts[k]);
  });
  rep.nu = max_of(nu_vals);
  rep.rho = max_of(rho_vals);
  return rep;
}

ConvergenceCheck verify_convergence_bound(const Matrix& X, const Vector& w_star, double sigma,
                                          int Q, int iterations, std::uint64_t seed,
                                          const ContractionOptions& opt) {
  if (w_star.size() != X.cols()) throw DimensionError("w_star must match the feature count");
  if (iterations < 1) throw InputError("need at least one iteration");
  if (sigma < 0) throw InputError("sigma must be nonnegative");

  ConvergenceCheck chk;
  chk.constants = contraction_constants(X, Q, opt);

  auto rng = make_rng(mix_seed(seed, 0x626f756e64));
  std::normal_distribution<double> noise(0.0, 1.0);
  Vector eta(X.rows());
  for (int i = 0; i < eta.size(); ++i) eta[i] = sigma * noise(rng);
  chk.noise_norm = eta.norm();
  const Dataset data = Dataset::regression(X, X * w_star + eta);

  PGDConfig cfg;
  cfg.loss = LossKind::Squared;
  cfg.hp.Q = Q;
  cfg.hp.lambda = 0.0;
  cfg.hp.epsilon = 0.0;  // never stop early: the bound is per-iteration
  cfg.hp.max_iter = iterations;
  cfg.theory_mode = true;
  cfg.init = InitKind::Zeros;
  cfg.record_iterates = true;
  const PGDResult res = pgd_fit(data, Variant::FeatureCluster, cfg);

  const double wnorm = w_star.norm();
  double pow_rho = 1.0;
  double geom = 0.0;  // sum_{s < t} rho^s
  chk.bound_holds = true;
  for (std::size_t t = 0; t < res.iterates.size(); ++t) {
    chk.errors.push_back((res.iterates[t].col(0) - w_star).norm());
    const double b = pow_rho * wnorm + geom * chk.constants.nu * chk.noise_norm;
    chk.bounds.push_back(b);
    if (chk.errors[t] > b * (1.0 + 1e-9) + 1e-12) chk.bound_holds = false;
    geom += pow_rho;
    pow_rho *= chk.constants.rho;
  }
  return chk;
}

StirlingBounds stirling_bounds(int d, int Q) {
  if (Q < 1 || Q > d) throw InputError("need 1 <= Q <= d");
  StirlingBounds b;
  b.value = stirling2(d, Q);
  const double Qd = Q;
  b.lower_simple = std::pow(Qd, d - Q);
  b.lower_refined = 0.5 * (Qd * Qd + Qd + 2.0) * std::pow(Qd, d - Q - 1) - 1.0;
  b.upper = 0.5 * std::pow(std::numbers::e * d / Qd, Qd) * std::pow(Qd, d - Q);
  const double v = static_cast<double>(b.value);
  b.simple_holds = b.lower_simple <= v && v <= b.upper;
  return b;
}

SparseCountBound sparse_subspace_count(int d, int k, int Q) {
  if (k < Q) throw InputError("the sparsity budget must cover the groups");
  if (k > d) throw InputError("the sparsity budget cannot exceed the dimension");
  SparseCountBound r;
  r.count = checked_mul(binomial(d, k), stirling2(k, Q), "subspace count overflows");
  r.bound = std::pow(d, k) * std::pow(k, Q) * std::pow(Q, k - Q);
  r.holds = static_cast<double>(r.count) <= r.bound;
  return r;
}

}  // namespace clm
