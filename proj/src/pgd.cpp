#include "clm/pgd.hpp"

#include <cmath>
#include <utility>

#include "clm/baselines.hpp"
#include "clm/parallel.hpp"
#include "clm/projections.hpp"
#include "clm/rng.hpp"
#include "descent.hpp"

namespace clm {

namespace {

bool is_scalar_loss(LossKind k) { return k == LossKind::Squared || k == LossKind::Logistic; }

struct Centering {
  Vector x_mean;
  double y_mean = 0.0;
};

// Unpenalized intercept for squared loss: fit on centered data, then
// b = mean(y) - mean(x)^T w.
Dataset center_data(const Dataset& data, Centering& c) {
  c.x_mean = data.X.colwise().mean();
  c.y_mean = data.y.mean();
  Matrix Xc = data.X.rowwise() - c.x_mean.transpose();
  Vector yc = data.y.array() - c.y_mean;
  return Dataset::regression(std::move(Xc), std::move(yc));
}

detail::DescentOptions make_options(const PGDConfig& config) {
  detail::DescentOptions opt;
  opt.line_search = config.line_search;
  opt.epsilon = config.hp.epsilon;
  opt.max_iter = config.hp.max_iter;
  opt.fixed_step = config.theory_mode;
  return opt;
}

InitKind resolve_init(const PGDConfig& config) {
  if (config.init != InitKind::Default) return config.init;
  return config.theory_mode ? InitKind::Zeros : InitKind::LeastSquaresKMeans;
}

// Groups equal rows (projection outputs copy one representative row to every
// group member, so equality is exact). Group order is by first occurrence.
void dedupe_rows(const Matrix& W, Partition& part, Matrix& values) {
  const int m = static_cast<int>(W.rows());
  std::vector<int> labels(m, -1);
  std::vector<int> reps;
  for (int i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if ((W.row(i).array() == W.row(reps[r]).array()).all()) {
        labels[i] = static_cast<int>(r);
        break;
      }
    }
    if (labels[i] < 0) {
      labels[i] = static_cast<int>(reps.size());
      reps.push_back(i);
    }
  }
  part = Partition::from_labels(labels);
  values.resize(static_cast<int>(reps.size()), W.cols());
  for (std::size_t r = 0; r < reps.size(); ++r) values.row(static_cast<int>(r)) = W.row(reps[r]);
}

Matrix checked_warm_start(const PGDConfig& config, int rows, int cols) {
  if (!config.warm_start) throw InputError("warm start requested without a starting point");
  if (config.warm_start->rows() != rows || config.warm_start->cols() != cols)
    throw DimensionError("warm start has the wrong shape");
  return *config.warm_start;
}

// ---------------------------------------------------------------------------
// Feature-clustered variants: W is d x K, rows share at most Q values.
// ---------------------------------------------------------------------------

PGDResult pgd_fit_feature(const Dataset& data, Variant variant, const PGDConfig& config) {
  const bool multiclass = variant == Variant::FeatureClusterMulticlass;
  const bool sparse = variant == Variant::SparseFeatureCluster;
  if (multiclass && is_scalar_loss(config.loss))
    throw UnsupportedModeError("multiclass variant needs a multiclass loss");
  if (!multiclass && !is_scalar_loss(config.loss))
    throw UnsupportedModeError("scalar variant needs a scalar loss");
  if (sparse && !config.hp.k) throw InputError("sparse variant needs a sparsity budget k");
  if (!sparse && config.hp.k) throw InputError("k is only used by the sparse variant");

  Centering center;
  Dataset work = data;
  if (config.hp.fit_intercept) {
    if (config.loss != LossKind::Squared || data.task != TaskKind::Regression)
      throw UnsupportedModeError("intercept fitting is supported for squared-loss regression");
    work = center_data(data, center);
  }

  const int d = work.d();
  const int K = multiclass ? work.num_targets() : 1;
  const int Q = config.hp.Q;
  const std::uint64_t seed = config.hp.rng_seed;
  const int restarts = config.kmeans_restarts;

  std::function<Matrix(const Matrix&, int)> project;
  if (sparse) {
    const int k = *config.hp.k;
    project = [k, Q](const Matrix& W, int) {
      return Matrix(project_sparse_clustered(W.col(0), k, Q).w);
    };
  } else if (!multiclass) {
    project = [Q](const Matrix& W, int) {
      return project_clustered(W, Q, ClusterProjMode::Exact1d, 0).W_hat;
    };
  } else {
    project = [Q, seed, restarts](const Matrix& W, int t) {
      const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(t + 2));
      return project_clustered(W, Q, ClusterProjMode::KMeansPP, s, restarts).W_hat;
    };
  }

  Matrix W0;
  switch (resolve_init(config)) {
    case InitKind::Zeros:
      W0 = Matrix::Zero(d, K);
      break;
    case InitKind::Warm:
      W0 = project(checked_warm_start(config, d, K), -1);
      break;
    default: {
      Matrix targets = multiclass ? work.Y : Matrix(work.y);
      W0 = project(fit_ls_multi(work.X, targets, config.hp.lambda), -1);
      break;
    }
  }

  PGDResult res;
  detail::DescentCallbacks cb;
  cb.objective = [&](const Matrix& W) { return loss_value(config.loss, work, W, config.hp.lambda); };
  cb.gradient = [&](const Matrix& W) {
    return loss_value_grad(config.loss, work, W, config.hp.lambda).grad;
  };
  cb.project = project;
  if (config.record_iterates) cb.on_accept = [&](const Matrix& W) { res.iterates.push_back(W); };

  res.W = detail::run_projected_descent(std::move(W0), cb, make_options(config), res.report);
  dedupe_rows(res.W, res.partition, res.values);
  if (sparse) {
    ProjectionResult pr = project_sparse_clustered(res.W.col(0), *config.hp.k, Q);
    res.sparse = SparseClusteredModel{pr.w, pr.support, pr.support_groups, pr.barycenters};
  }
  if (config.hp.fit_intercept) res.intercept = center.y_mean - center.x_mean.dot(res.W.col(0));
  return res;
}

// ---------------------------------------------------------------------------
// Per-sample loss kernels for the sample-clustered variant. Column i of W is
// the predictor of sample i (class blocks stacked for multiclass kinds).
// Per-sample terms land in private slots and are reduced serially, so results
// do not depend on the thread count.
// ---------------------------------------------------------------------------

double per_sample_objective(LossKind kind, const Dataset& data, const Matrix& W, double lambda) {
  const int n = data.n();
  const int d = data.d();
  const int K = is_scalar_loss(kind) ? 1 : data.num_targets();
  Vector terms(n);
  parallel_for(n, [&](std::int64_t i) {
    Eigen::Map<const Matrix> Wi(W.col(i).data(), d, K);
    Eigen::RowVectorXd z = data.X.row(i) * Wi;
    switch (kind) {
      case LossKind::Squared: {
        const double r = z[0] - data.y[i];
        terms[i] = 0.5 * r * r;
        break;
      }
      case LossKind::Logistic:
        terms[i] = detail::log1pexp_neg(detail::sign_label(data.y[i]) * z[0]);
        break;
      case LossKind::MulticlassSquared:
        terms[i] = 0.5 * (z - data.Y.row(i)).squaredNorm();
        break;
      case LossKind::MulticlassLogistic: {
        const double zmax = z.maxCoeff();
        const double lse = zmax + std::log((z.array() - zmax).exp().sum());
        terms[i] = lse - z.dot(data.Y.row(i));
        break;
      }
    }
  });
  return terms.sum() / n + 0.5 * lambda * W.squaredNorm();
}

Matrix per_sample_gradient(LossKind kind, const Dataset& data, const Matrix& W, double lambda) {
  const int n = data.n();
  const int d = data.d();
  const int K = is_scalar_loss(kind) ? 1 : data.num_targets();
  Matrix grad = lambda * W;
  parallel_for(n, [&](std::int64_t i) {
    Eigen::Map<const Matrix> Wi(W.col(i).data(), d, K);
    Eigen::RowVectorXd z = data.X.row(i) * Wi;
    Eigen::RowVectorXd g(K);
    switch (kind) {
      case LossKind::Squared:
        g[0] = z[0] - data.y[i];
        break;
      case LossKind::Logistic: {
        const double s = detail::sign_label(data.y[i]);
        g[0] = -s / (1.0 + std::exp(s * z[0]));
        break;
      }
      case LossKind::MulticlassSquared:
        g = z - data.Y.row(i);
        break;
      case LossKind::MulticlassLogistic: {
        const double zmax = z.maxCoeff();
        Eigen::RowVectorXd e = (z.array() - zmax).exp();
        g = e / e.sum() - data.Y.row(i);
        break;
      }
    }
    Eigen::Map<Matrix> Gi(grad.col(i).data(), d, K);
    Gi += data.X.row(i).transpose() * g / static_cast<double>(n);
  });
  return grad;
}

}  // namespace

PGDResult pgd_fit_sample_cluster(const Dataset& data, const PGDConfig& config) {
  config.hp.validate();
  if (config.hp.k) throw InputError("sample clustering has no sparsity budget");
  if (config.hp.fit_intercept)
    throw UnsupportedModeError("intercept fitting is supported for the feature variants");
  const bool scalar = is_scalar_loss(config.loss);
  if (scalar && data.task != TaskKind::Regression)
    throw UnsupportedModeError("scalar loss needs a regression dataset");
  if (!scalar && data.task == TaskKind::Regression)
    throw UnsupportedModeError("multiclass loss needs a target matrix");

  const int n = data.n();
  const int d = data.d();
  const int K = scalar ? 1 : data.num_targets();
  const int rows = d * K;
  const int Q = config.hp.Q;
  const std::uint64_t seed = config.hp.rng_seed;
  const int restarts = config.kmeans_restarts;
  const ClusterProjMode mode = rows == 1 ? ClusterProjMode::Exact1d : ClusterProjMode::KMeansPP;

  auto project = [Q, seed, restarts, mode](const Matrix& W, int t) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(t + 2));
    return Matrix(project_clustered(W.transpose(), Q, mode, s, restarts).W_hat.transpose());
  };

  Matrix W0;
  switch (resolve_init(config)) {
    case InitKind::Zeros:
      W0 = Matrix::Zero(rows, n);
      break;
    case InitKind::Warm:
      W0 = project(checked_warm_start(config, rows, n), -1);
      break;
    default: {
      // One shared ridge predictor tiled over samples; the first gradient
      // step differentiates the columns and the projection splits them.
      Matrix targets = scalar ? Matrix(data.y) : data.Y;
      Matrix Wls = fit_ls_multi(data.X, targets, config.hp.lambda);
      W0 = Eigen::Map<Vector>(Wls.data(), rows).replicate(1, n);
      break;
    }
  }

  PGDResult res;
  detail::DescentCallbacks cb;
  cb.objective = [&](const Matrix& W) {
    return per_sample_objective(config.loss, data, W, config.hp.lambda);
  };
  cb.gradient = [&](const Matrix& W) {
    return per_sample_gradient(config.loss, data, W, config.hp.lambda);
  };
  cb.project = project;
  if (config.record_iterates) cb.on_accept = [&](const Matrix& W) { res.iterates.push_back(W); };

  res.W = detail::run_projected_descent(std::move(W0), cb, make_options(config), res.report);
  Matrix cols = res.W.transpose();
  dedupe_rows(cols, res.partition, res.values);
  return res;
}

PGDResult pgd_fit_multitask(const Dataset& data, const PGDConfig& config) {
  config.hp.validate();
  if (config.hp.k) throw InputError("the multitask variant has no sparsity budget");
  if (config.hp.fit_intercept)
    throw UnsupportedModeError("intercept fitting is supported for the feature variants");
  if (config.loss != LossKind::MulticlassSquared)
    throw UnsupportedModeError("multitask fitting uses the squared loss over tasks");
  if (data.task == TaskKind::Regression)
    throw UnsupportedModeError("multitask fitting needs a target matrix");

  const int d = data.d();
  const int K = data.num_targets();
  const int Q = config.hp.Q;
  const std::uint64_t seed = config.hp.rng_seed;
  const int restarts = config.kmeans_restarts;
  const MultitaskPenaltyParams params{config.hp.lambda_M, config.hp.lambda_B, config.hp.lambda_W};
  const ClusterProjMode mode = d == 1 ? ClusterProjMode::Exact1d : ClusterProjMode::KMeansPP;

  // State stacks the free task predictors W with the clustered anchors
  // W_tilde side by side; only the anchor half is projected.
  auto project = [Q, K, seed, restarts, mode](const Matrix& S, int t) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(t + 2));
    Matrix out = S;
    out.rightCols(K) =
        project_clustered(S.rightCols(K).transpose(), Q, mode, s, restarts).W_hat.transpose();
    return out;
  };

  Matrix S0(d, 2 * K);
  switch (resolve_init(config)) {
    case InitKind::Zeros:
      S0.setZero();
      break;
    case InitKind::Warm:
      S0 = project(checked_warm_start(config, d, 2 * K), -1);
      break;
    default: {
      Matrix Wls = fit_ls_multi(data.X, data.Y, config.hp.lambda);
      S0.leftCols(K) = Wls;
      S0.rightCols(K) = Wls;
      S0 = project(S0, -1);
      break;
    }
  }

  PGDResult res;
  detail::DescentCallbacks cb;
  cb.objective = [&](const Matrix& S) {
    return loss_value(config.loss, data, S.leftCols(K), config.hp.lambda) +
           multitask_penalty(S.leftCols(K), S.rightCols(K), params);
  };
  cb.gradient = [&](const Matrix& S) {
    const Matrix W = S.leftCols(K);
    const Matrix Wt = S.rightCols(K);
    Matrix g(d, 2 * K);
    g.leftCols(K) = loss_value_grad(config.loss, data, W, config.hp.lambda).grad +
                    multitask_penalty_grad_W(W, Wt, params);
    g.rightCols(K) = multitask_penalty_grad_Wt(W, Wt, params);
    return g;
  };
  cb.project = project;
  if (config.record_iterates) cb.on_accept = [&](const Matrix& S) { res.iterates.push_back(S); };

  Matrix S = detail::run_projected_descent(std::move(S0), cb, make_options(config), res.report);
  res.W = S.leftCols(K);
  res.W_tilde = S.rightCols(K);
  Matrix anchors = res.W_tilde.transpose();
  dedupe_rows(anchors, res.partition, res.values);
  return res;
}

PGDResult pgd_fit(const Dataset& data, Variant variant, const PGDConfig& config) {
  config.hp.validate();
  switch (variant) {
    case Variant::SampleCluster:
      return pgd_fit_sample_cluster(data, config);
    case Variant::Multitask:
      return pgd_fit_multitask(data, config);
    default:
      return pgd_fit_feature(data, variant, config);
  }
}

ClusteredLinearModel PGDResult::feature_model() const {
  ClusteredLinearModel m;
  m.groups = partition;
  m.values = values;
  m.intercept = intercept;
  return m;
}

SampleClusteredModel PGDResult::sample_model(int num_targets) const {
  SampleClusteredModel m;
  m.experts = values.transpose();
  m.groups = partition;
  m.num_targets = num_targets;
  return m;
}

}  // namespace clm
