#include "clm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clm/clustering.hpp"
#include "clm/losses.hpp"
#include "clm/projections.hpp"
#include "clm/rng.hpp"
#include "descent.hpp"

namespace clm {

Matrix fit_ls_multi(const Matrix& X, const Matrix& Y, double lambda) {
  if (lambda < 0) throw InputError("lambda must be >= 0");
  if (X.rows() != Y.rows()) throw DimensionError("X and Y row counts differ");
  const double n = static_cast<double>(X.rows());
  if (lambda == 0.0) {
    // Minimum-norm least squares; exact on full-rank designs too.
    return X.completeOrthogonalDecomposition().solve(Y);
  }
  const int d = static_cast<int>(X.cols());
  Matrix A = X.transpose() * X + n * lambda * Matrix::Identity(d, d);
  return A.llt().solve(X.transpose() * Y);
}

Vector fit_ls(const Dataset& data, double lambda) {
  if (data.task != TaskKind::Regression) throw UnsupportedModeError("fit_ls needs a scalar target");
  return fit_ls_multi(data.X, data.y, lambda).col(0);
}

ClusteredLinearModel fit_lsk(const Dataset& data, int Q, double lambda) {
  if (Q < 1) throw InputError("Q must be >= 1");
  const Vector w = fit_ls(data, lambda);
  KMeansResult km = kmeans_1d_exact(w, Q);
  ClusteredLinearModel model{std::move(km.partition), std::move(km.centroids), 0.0};
  return model;
}

namespace {

// Exact minimizer of (1/n) sum_{i in G} loss + (lambda/2) s ||v||^2 for the
// squared loss; s is the group size.
Vector group_ridge(const Matrix& X, const Vector& y, const std::vector<int>& group, double lambda,
                   double n_total) {
  const int s = static_cast<int>(group.size());
  Matrix Xg(s, X.cols());
  Vector yg(s);
  for (int r = 0; r < s; ++r) {
    Xg.row(r) = X.row(group[r]);
    yg[r] = y[group[r]];
  }
  if (lambda == 0.0) return Xg.completeOrthogonalDecomposition().solve(yg);
  Matrix A = Xg.transpose() * Xg +
             n_total * lambda * static_cast<double>(s) * Matrix::Identity(X.cols(), X.cols());
  return A.llt().solve(Xg.transpose() * yg);
}

double sample_share(const Matrix& X, const Vector& y, int i, const Vector& v, double lambda,
                    double n) {
  const double r = X.row(i).dot(v) - y[i];
  return 0.5 * r * r / n + 0.5 * lambda * v.squaredNorm();
}

}  // namespace

AlternatingResult fit_alternating_sample(const Dataset& data, int Q, double lambda,
                                         std::uint64_t seed, const std::optional<Partition>& init,
                                         int max_alternations) {
  if (data.task != TaskKind::Regression)
    throw UnsupportedModeError("alternating fit needs a scalar target");
  if (Q < 1) throw InputError("Q must be >= 1");
  const int n = data.n();
  const int d = data.d();
  if (Q > n) throw InputError("more groups than samples");
  const double nd = n;

  std::vector<int> labels(n);
  if (init) {
    if (init->item_count() != n) throw DimensionError("init partition must cover all samples");
    if (init->group_count() > Q) throw InputError("init partition uses too many groups");
    labels = init->labels();
  } else {
    // Balanced random start: shuffle, then deal samples out round-robin.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    for (int r = 0; r < n; ++r) labels[order[r]] = r % Q;
  }

  Matrix V = Matrix::Zero(d, Q);
  AlternatingResult out;
  for (int it = 0; it < max_alternations; ++it) {
    // Refit each nonempty group exactly.
    std::vector<std::vector<int>> members(Q);
    for (int i = 0; i < n; ++i) members[labels[i]].push_back(i);
    for (int q = 0; q < Q; ++q)
      if (!members[q].empty()) V.col(q) = group_ridge(data.X, data.y, members[q], lambda, nd);

    // Reassign to the group with the smallest per-sample share.
    bool changed = false;
    std::vector<bool> occupied(Q, false);
    for (int i = 0; i < n; ++i) {
      int arg = labels[i];
      double best = sample_share(data.X, data.y, i, V.col(arg), lambda, nd);
      for (int q = 0; q < Q; ++q) {
        if (members[q].empty()) continue;  // no current expert to compare against
        const double s = sample_share(data.X, data.y, i, V.col(q), lambda, nd);
        if (s < best) {
          best = s;
          arg = q;
        }
      }
      changed |= arg != labels[i];
      labels[i] = arg;
      occupied[arg] = true;
    }

    // Reseed emptied groups with the worst-fit sample; the singleton refit
    // can only lower that sample's share.
    for (int q = 0; q < Q; ++q) {
      if (occupied[q]) continue;
      int worst = -1;
      double worst_share = -1.0;
      for (int i = 0; i < n; ++i) {
        bool alone = true;
        for (int j = 0; j < n; ++j)
          if (j != i && labels[j] == labels[i]) {
            alone = false;
            break;
          }
        if (alone) continue;  // moving it would just empty another group
        const double s = sample_share(data.X, data.y, i, V.col(labels[i]), lambda, nd);
        if (s > worst_share) {
          worst_share = s;
          worst = i;
        }
      }
      if (worst < 0) break;
      labels[worst] = q;
      V.col(q) = group_ridge(data.X, data.y, {worst}, lambda, nd);
      occupied[q] = true;
      changed = true;
    }

    Partition part = Partition::from_labels(labels);
    // Canonical group order for the trace and the returned model; labels[]
    // indexes the working V columns, so map through any member.
    Matrix experts(d, part.group_count());
    for (int q = 0; q < part.group_count(); ++q)
      experts.col(q) = V.col(labels[part.groups()[q].front()]);
    out.objective_trace.push_back(
        sample_clustered_objective(LossKind::Squared, data, experts, part, lambda));
    out.alternations = it + 1;
    out.model.experts = std::move(experts);
    out.model.groups = std::move(part);
    out.model.num_targets = 1;
    if (!changed) {
      out.converged = true;
      break;
    }
  }
  return out;
}

IHTResult fit_iht(const Dataset& data, int k, double lambda, const LineSearchParams& line_search,
                  double epsilon, int max_iter) {
  if (data.task != TaskKind::Regression) throw UnsupportedModeError("fit_iht needs a scalar target");
  if (k <= 0) throw InputError("the sparsity budget must be positive");
  if (k > data.d()) throw InputError("the sparsity budget cannot exceed the feature count");
  detail::DescentCallbacks cb;
  cb.objective = [&](const Matrix& W) {
    return loss_value(LossKind::Squared, data, W, lambda);
  };
  cb.gradient = [&](const Matrix& W) {
    return loss_value_grad(LossKind::Squared, data, W, lambda).grad;
  };
  cb.project = [&](const Matrix& W, int) -> Matrix {
    return project_ksparse(W.col(0), k).w;
  };
  detail::DescentOptions opt;
  opt.line_search = line_search;
  opt.epsilon = epsilon;
  opt.max_iter = max_iter;
  IHTResult res;
  Matrix W0 = Matrix::Zero(data.d(), 1);
  res.w = detail::run_projected_descent(std::move(W0), cb, opt, res.report).col(0);
  return res;
}

}  // namespace clm
