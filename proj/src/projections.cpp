#include "clm/projections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "clm/clustering.hpp"

namespace clm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

ClusteredProjection project_clustered(const Matrix& W, int Q, ClusterProjMode mode,
                                      std::uint64_t seed, int restarts) {
  if (W.rows() < 1 || W.cols() < 1) throw DimensionError("projection input is empty");
  if (Q < 1) throw InputError("Q must be >= 1");
  KMeansResult km = [&] {
    if (mode == ClusterProjMode::Exact1d) {
      if (W.cols() != 1)
        throw UnsupportedModeError("exact 1-d projection requires a single column");
      return kmeans_1d_exact(W.col(0), Q);
    }
    return kmeans_pp(W, Q, seed, restarts);
  }();
  Assignment Z = partition_to_assignment(km.partition);
  Matrix W_hat = Z.Z * km.centroids;
  double distance2 = (W - W_hat).squaredNorm();
  return {std::move(Z), std::move(km.centroids), std::move(W_hat), distance2};
}

ProjectionResult project_ksparse(const Vector& x, int k) {
  const int d = static_cast<int>(x.size());
  if (k < 0) throw InputError("k must be >= 0");
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(x[a]) > std::abs(x[b]);  // stable: magnitude ties keep lower index
  });
  ProjectionResult res;
  res.w = Vector::Zero(d);
  const int kk = std::min(k, d);
  for (int r = 0; r < kk; ++r) {
    const int i = order[r];
    if (x[i] == 0.0) break;  // zero entries add nothing to the support
    res.support.push_back(i);
  }
  std::sort(res.support.begin(), res.support.end());
  for (int i : res.support) {
    res.w[i] = x[i];
    res.support_groups.push_back({i});
    res.barycenters.push_back(x[i]);
  }
  res.distance2 = (x - res.w).squaredNorm();
  return res;
}

NegDPTables negative_side_dp(const Vector& x_sorted, int k, int Q) {
  const int d = static_cast<int>(x_sorted.size());
  for (int i = 1; i < d; ++i)
    if (x_sorted[i - 1] > x_sorted[i]) throw InputError("input must be sorted ascending");
  if (k < 0 || Q < 0) throw InputError("k and Q must be >= 0");

  NegDPTables t;
  t.points = std::min(k, d);
  t.groups = Q;
  t.f = Matrix::Constant(t.points + 1, Q + 1, -kInf);
  t.start = Eigen::MatrixXi::Zero(t.points + 1, Q + 1);
  t.mu = Matrix::Constant(t.points + 1, Q + 1, std::numeric_limits<double>::quiet_NaN());
  // Zero points cost nothing no matter how many groups remain unused; one or
  // more points in zero groups is infeasible.
  for (int q = 0; q <= Q; ++q) t.f(0, q) = 0.0;

  for (int j = 1; j <= t.points; ++j) {
    for (int q = 1; q <= std::min(Q, j); ++q) {
      double best = -kInf;
      int best_start = 0;
      double best_mu = 0.0;
      double mu = 0.0;  // running barycenter of positions i..j
      for (int i = j; i >= q; --i) {
        const int size = j - i + 1;
        mu = (x_sorted[i - 1] + (size - 1) * mu) / size;
        if (mu >= 0.0) continue;  // group barycenter must be strictly negative
        const double prev = t.f(i - 1, q - 1);
        if (prev == -kInf) continue;
        const double cand = prev + size * mu * mu;
        if (cand > best) {
          best = cand;
          best_start = i;
          best_mu = mu;
        }
      }
      t.f(j, q) = best;
      t.start(j, q) = best_start;
      t.mu(j, q) = best == -kInf ? std::numeric_limits<double>::quiet_NaN() : best_mu;
    }
  }
  return t;
}

namespace {

// Walks the DP tables back from (points, groups), emitting groups of 1-based
// prefix positions with their barycenters.
void backtrack_side(const NegDPTables& t, int points, int groups,
                    std::vector<std::pair<std::vector<int>, double>>& out) {
  int j = points;
  int q = groups;
  while (q > 0 && j > 0) {
    const int i = t.start(j, q);
    std::vector<int> positions;
    for (int p = i; p <= j; ++p) positions.push_back(p);
    out.emplace_back(std::move(positions), t.mu(j, q));
    j = i - 1;
    --q;
  }
}

}  // namespace

ProjectionResult project_sparse_clustered(const Vector& x, int k, int Q) {
  const int d = static_cast<int>(x.size());
  if (k < 0) throw InputError("k must be >= 0");
  if (Q < 1) throw InputError("Q must be >= 1");
  ProjectionResult res;
  res.w = Vector::Zero(d);
  if (d == 0) return res;

  std::vector<int> asc(d);
  std::iota(asc.begin(), asc.end(), 0);
  std::stable_sort(asc.begin(), asc.end(), [&](int a, int b) { return x[a] < x[b]; });
  Vector x_asc(d);
  for (int i = 0; i < d; ++i) x_asc[i] = x[asc[i]];
  // Positive side works on -x in the reversed order, so the two prefixes can
  // never select the same original index.
  Vector x_desc_neg(d);
  for (int i = 0; i < d; ++i) x_desc_neg[i] = -x_asc[d - 1 - i];

  const int kk = std::min(k, d);
  const NegDPTables neg = negative_side_dp(x_asc, kk, Q);
  const NegDPTables pos = negative_side_dp(x_desc_neg, kk, Q);

  double best = 0.0;  // selecting nothing is always feasible
  int best_total = 0, best_neg_points = 0, best_neg_groups = 0;
  for (int total = 0; total <= kk; ++total) {
    const int q_cap = std::min(total, Q);
    for (int q = 0; q <= q_cap; ++q) {
      for (int j = q; j <= total; ++j) {
        const double fn = neg.f(j, q);
        if (fn == -kInf) continue;
        const double fp = pos.f(total - j, q_cap - q);
        if (fp == -kInf) continue;
        const double obj = fn + fp;
        if (obj > best) {
          best = obj;
          best_total = total;
          best_neg_points = j;
          best_neg_groups = q;
        }
      }
    }
  }

  std::vector<std::pair<std::vector<int>, double>> sides;
  backtrack_side(neg, best_neg_points, best_neg_groups, sides);
  const std::size_t neg_count = sides.size();
  backtrack_side(pos, best_total - best_neg_points,
                 std::min(best_total, Q) - best_neg_groups, sides);

  for (std::size_t s = 0; s < sides.size(); ++s) {
    const bool negative_side = s < neg_count;
    std::vector<int> indices;
    for (int pos1 : sides[s].first) {
      const int sorted_pos = negative_side ? pos1 - 1 : d - pos1;
      indices.push_back(asc[sorted_pos]);
    }
    std::sort(indices.begin(), indices.end());
    const double mu = negative_side ? sides[s].second : -sides[s].second;
    for (int i : indices) {
      res.w[i] = mu;
      res.support.push_back(i);
    }
    res.support_groups.push_back(std::move(indices));
    res.barycenters.push_back(mu);
  }
  std::sort(res.support.begin(), res.support.end());

  // Canonical group order: by smallest member.
  std::vector<int> perm(res.support_groups.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](int a, int b) {
    return res.support_groups[a].front() < res.support_groups[b].front();
  });
  std::vector<std::vector<int>> groups;
  std::vector<double> mus;
  for (int p : perm) {
    groups.push_back(std::move(res.support_groups[p]));
    mus.push_back(res.barycenters[p]);
  }
  res.support_groups = std::move(groups);
  res.barycenters = std::move(mus);

  res.distance2 = (x - res.w).squaredNorm();
  return res;
}

}  // namespace clm
