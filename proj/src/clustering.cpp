#include "clm/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include "clm/parallel.hpp"
#include "clm/rng.hpp"

namespace clm {

namespace detail {

namespace {

inline void assign_one(const Matrix& points, const Matrix& centroids, int i,
                       std::vector<int>& labels, Vector& sqdist) {
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int q = 0; q < centroids.rows(); ++q) {
    const double d2 = (points.row(i) - centroids.row(q)).squaredNorm();
    if (d2 < best) {
      best = d2;
      arg = q;
    }
  }
  labels[i] = arg;
  sqdist[i] = best;
}

}  // namespace

void assign_nearest_serial(const Matrix& points, const Matrix& centroids,
                           std::vector<int>& labels, Vector& sqdist) {
  labels.resize(points.rows());
  sqdist.resize(points.rows());
  serial_for(points.rows(), [&](std::int64_t i) { assign_one(points, centroids, i, labels, sqdist); });
}

void assign_nearest_parallel(const Matrix& points, const Matrix& centroids,
                             std::vector<int>& labels, Vector& sqdist) {
  labels.resize(points.rows());
  sqdist.resize(points.rows());
  parallel_for(points.rows(), [&](std::int64_t i) { assign_one(points, centroids, i, labels, sqdist); });
}

}  // namespace detail

namespace {

// Groups rows that are bitwise equal; returns one representative per value.
std::vector<int> distinct_row_representatives(const Matrix& points, std::vector<int>& value_id) {
  const int m = static_cast<int>(points.rows());
  std::vector<int> reps;
  value_id.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if (points.row(i) == points.row(reps[r])) {
        value_id[i] = static_cast<int>(r);
        break;
      }
    }
    if (value_id[i] < 0) {
      value_id[i] = static_cast<int>(reps.size());
      reps.push_back(i);
    }
  }
  return reps;
}

KMeansResult finalize_from_labels(const Matrix& points, const std::vector<int>& labels,
                                  int iterations) {
  Partition part = Partition::from_labels(labels);
  Matrix centroids = Matrix::Zero(part.group_count(), points.cols());
  for (int q = 0; q < part.group_count(); ++q) {
    for (int i : part.groups()[q]) centroids.row(q) += points.row(i);
    centroids.row(q) /= static_cast<double>(part.groups()[q].size());
  }
  double cost = 0.0;
  for (int i = 0; i < points.rows(); ++i)
    cost += (points.row(i) - centroids.row(part.labels()[i])).squaredNorm();
  return {std::move(part), std::move(centroids), cost, iterations};
}

struct RestartOutcome {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> labels;
  int iterations = 0;
};

RestartOutcome run_one_restart(const Matrix& points, int Q, std::uint64_t seed) {
  const int m = static_cast<int>(points.rows());
  std::mt19937_64 rng(seed);
  Matrix centroids(Q, points.cols());

  // D^2 seeding.
  std::uniform_int_distribution<int> uniform_index(0, m - 1);
  centroids.row(0) = points.row(uniform_index(rng));
  Vector d2 = Vector::Constant(m, std::numeric_limits<double>::infinity());
  std::vector<int> labels(m, 0);
  for (int c = 1; c < Q; ++c) {
    for (int i = 0; i < m; ++i)
      d2[i] = std::min(d2[i], (points.row(i) - centroids.row(c - 1)).squaredNorm());
    const double total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> unif(0.0, total);
      const double u = unif(rng);
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        acc += d2[i];
        if (u < acc) {
          pick = i;
          break;
        }
        pick = i;
      }
    }
    centroids.row(c) = points.row(pick);
  }

  Vector sqdist(m);
  detail::assign_nearest_parallel(points, centroids, labels, sqdist);
  double prev_cost = std::numeric_limits<double>::infinity();
  int iters = 0;
  for (; iters < 100; ++iters) {
    // Update step: centroids become group means.
    Matrix sums = Matrix::Zero(Q, points.cols());
    std::vector<int> counts(Q, 0);
    for (int i = 0; i < m; ++i) {
      sums.row(labels[i]) += points.row(i);
      ++counts[labels[i]];
    }
    for (int q = 0; q < Q; ++q)
      if (counts[q] > 0) centroids.row(q) = sums.row(q) / counts[q];

    std::vector<int> next(m);
    detail::assign_nearest_parallel(points, centroids, next, sqdist);

    // Re-seed empty clusters with the point farthest from its centroid.
    for (int q = 0; q < Q; ++q) {
      if (std::find(next.begin(), next.end(), q) != next.end()) continue;
      int far = 0;
      for (int i = 1; i < m; ++i)
        if (sqdist[i] > sqdist[far]) far = i;
      centroids.row(q) = points.row(far);
      detail::assign_nearest_parallel(points, centroids, next, sqdist);
    }

    const double cost = sqdist.sum();
    assert(cost <= prev_cost * (1.0 + 1e-12) + 1e-15);
    const bool stable = (next == labels);
    labels = std::move(next);
    prev_cost = cost;
    if (stable) break;
  }
  return {prev_cost, std::move(labels), iters};
}

}  // namespace

KMeansResult kmeans_pp(const Matrix& points, int Q, std::uint64_t seed, int restarts) {
  if (points.rows() < 1 || points.cols() < 1) throw DimensionError("kmeans needs nonempty input");
  if (Q < 1) throw InputError("Q must be >= 1");
  if (restarts < 1) throw InputError("restarts must be >= 1");

  std::vector<int> value_id;
  const std::vector<int> reps = distinct_row_representatives(points, value_id);
  if (static_cast<int>(reps.size()) <= Q) return finalize_from_labels(points, value_id, 0);

  std::vector<RestartOutcome> outcomes(restarts);
  for (int r = 0; r < restarts; ++r) outcomes[r] = run_one_restart(points, Q, mix_seed(seed, r));
  int best = 0;
  for (int r = 1; r < restarts; ++r)
    if (outcomes[r].cost < outcomes[best].cost) best = r;
  return finalize_from_labels(points, outcomes[best].labels, outcomes[best].iterations);
}

KMeansResult kmeans_1d_exact(const Vector& values, int Q) {
  const int m = static_cast<int>(values.size());
  if (m < 1) throw DimensionError("kmeans needs nonempty input");
  if (Q < 1) throw InputError("Q must be >= 1");

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });

  int distinct = 1;
  for (int i = 1; i < m; ++i) distinct += values[order[i]] != values[order[i - 1]];
  const int q_eff = std::min(Q, distinct);

  // Prefix sums over the sorted sequence; cost(a..b) in O(1).
  std::vector<double> s1(m + 1, 0.0), s2(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    const double v = values[order[i]];
    s1[i + 1] = s1[i] + v;
    s2[i + 1] = s2[i] + v * v;
  }
  auto seg_cost = [&](int a, int b) {  // positions a..b inclusive, 0-based
    const double len = b - a + 1;
    const double sum = s1[b + 1] - s1[a];
    const double ss = s2[b + 1] - s2[a];
    return std::max(0.0, ss - sum * sum / len);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Matrix D = Matrix::Constant(q_eff + 1, m + 1, kInf);
  Eigen::MatrixXi split = Eigen::MatrixXi::Zero(q_eff + 1, m + 1);
  D(0, 0) = 0.0;
  for (int q = 1; q <= q_eff; ++q) {
    for (int i = q; i <= m; ++i) {
      for (int j = q; j <= i; ++j) {  // last group covers positions j-1..i-1
        const double cand = D(q - 1, j - 1) + seg_cost(j - 1, i - 1);
        if (cand < D(q, i)) {
          D(q, i) = cand;
          split(q, i) = j;
        }
      }
    }
  }

  std::vector<int> labels(m);
  int end = m;
  for (int q = q_eff; q >= 1; --q) {
    const int begin = split(q, end);
    for (int pos = begin - 1; pos <= end - 1; ++pos) labels[order[pos]] = q - 1;
    end = begin - 1;
  }
  KMeansResult res = finalize_from_labels(values, labels, 0);
  res.cost = D(q_eff, m);
  return res;
}

}  // namespace clm
