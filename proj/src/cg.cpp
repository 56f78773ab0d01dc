#include "clm/cg.hpp"

#include <chrono>
#include <cmath>
#include <utility>

#include "clm/clustering.hpp"
#include "clm/rng.hpp"

namespace clm {

namespace {

Matrix targets_of(const Dataset& data) {
  return data.task == TaskKind::Regression ? Matrix(data.y) : data.Y;
}

// A = I + X M X^T/(n lambda) (feature kinds) or I + (XX^T o M)/(n lambda)
// (sample kinds). Both are identity plus PSD, hence symmetric positive
// definite whenever M stays in the hull.
Matrix system_matrix(const PsiProblem& prob, const Matrix& M) {
  if (M.rows() != prob.m() || M.cols() != prob.m())
    throw DimensionError("relaxed matrix has the wrong size");
  const double scale = 1.0 / (prob.n() * prob.lambda);
  const int n = prob.n();
  if (prob.over_samples())
    return Matrix::Identity(n, n) + scale * (prob.X * prob.X.transpose()).cwiseProduct(M);
  return Matrix::Identity(n, n) + scale * (prob.X * M * prob.X.transpose());
}

Eigen::LLT<Matrix> factor_system(const Matrix& A) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    const double cond = A.diagonal().maxCoeff() / A.diagonal().minCoeff();
    throw IllConditionedError("relaxed ridge system failed to factorize", cond);
  }
  return llt;
}

}  // namespace

PsiProblem PsiProblem::from_dataset(const Dataset& data, bool over_samples, double lambda) {
  if (lambda <= 0) throw InputError("the relaxation requires lambda > 0");
  PsiProblem p;
  p.X = data.X;
  p.T = targets_of(data);
  p.lambda = lambda;
  if (data.task == TaskKind::Regression)
    p.kind = over_samples ? RelaxKind::SampleRegression : RelaxKind::FeatureRegression;
  else
    p.kind = over_samples ? RelaxKind::SampleClassification : RelaxKind::FeatureClassification;
  return p;
}

double psi_value(const PsiProblem& problem, const Matrix& M) {
  const Matrix A = system_matrix(problem, M);
  const Matrix a = factor_system(A).solve(problem.T);
  return (problem.T.array() * a.array()).sum() / (2.0 * problem.n());
}

PsiEval psi_eval(const PsiProblem& problem, const Matrix& M, bool want_full) {
  const int n = problem.n();
  const Matrix A = system_matrix(problem, M);
  const Matrix a = factor_system(A).solve(problem.T);  // n x K
  PsiEval ev;
  ev.value = (problem.T.array() * a.array()).sum() / (2.0 * n);
  const double root = std::sqrt(2.0 * problem.lambda) * n;
  if (problem.over_samples()) {
    // columns [diag(a_k) X]_k side by side
    const int d = problem.d();
    const int K = static_cast<int>(problem.T.cols());
    ev.factor.resize(n, d * K);
    for (int k = 0; k < K; ++k)
      ev.factor.middleCols(k * d, d) = a.col(k).asDiagonal() * problem.X / root;
  } else {
    ev.factor = problem.X.transpose() * a / root;  // d x K
  }
  if (want_full) ev.P = ev.factor * ev.factor.transpose();
  return ev;
}

double equivalence_inner_factor(const Partition& p, const Matrix& F) {
  if (p.item_count() != F.rows()) throw DimensionError("partition does not match factor rows");
  double total = 0.0;
  for (const auto& g : p.groups()) {
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(F.cols());
    for (int i : g) mu += F.row(i);
    mu /= static_cast<double>(g.size());
    total += static_cast<double>(g.size()) * mu.squaredNorm();
  }
  return total;
}

Partition linear_oracle_factor(const Matrix& F, int Q, std::uint64_t seed, int restarts) {
  if (F.cols() == 1) return kmeans_1d_exact(F.col(0), Q).partition;
  return kmeans_pp(F, Q, seed, restarts).partition;
}

Partition linear_oracle(const Matrix& P, int Q, std::uint64_t seed, int restarts) {
  if (P.rows() != P.cols()) throw DimensionError("gradient factor must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(P);
  if (es.info() != Eigen::Success)
    throw IllConditionedError("eigendecomposition of the oracle matrix failed", 0.0);
  const Vector& vals = es.eigenvalues();  // ascending
  const double cutoff = std::max(0.0, vals.maxCoeff()) * 1e-12;
  int kept = 0;
  for (int j = 0; j < vals.size(); ++j)
    if (vals[j] > cutoff) ++kept;
  Matrix F;
  if (kept == 0) {
    F = Matrix::Zero(P.rows(), 1);
  } else {
    F.resize(P.rows(), kept);
    int c = 0;
    for (int j = 0; j < vals.size(); ++j)
      if (vals[j] > cutoff) F.col(c++) = es.eigenvectors().col(j) * std::sqrt(vals[j]);
  }
  return linear_oracle_factor(F, Q, seed, restarts);
}

ClusteredLinearModel refit_feature_partition(const Dataset& data, const Partition& groups,
                                             double lambda) {
  if (groups.item_count() != data.d()) throw DimensionError("partition must cover the features");
  const Matrix T = targets_of(data);
  const Matrix Z = partition_to_assignment(groups).Z;
  const Matrix XZ = data.X * Z;
  const Matrix H =
      XZ.transpose() * XZ + (data.n() * lambda) * (Z.transpose() * Z);
  const Matrix rhs = XZ.transpose() * T;
  Eigen::LLT<Matrix> llt(H);
  Matrix V;
  if (lambda > 0 && llt.info() == Eigen::Success) {
    V = llt.solve(rhs);
  } else {
    V = H.completeOrthogonalDecomposition().solve(rhs);
  }
  ClusteredLinearModel model;
  model.groups = groups;
  model.values = V;
  return model;
}

SampleClusteredModel refit_sample_partition(const Dataset& data, const Partition& groups,
                                            double lambda) {
  if (groups.item_count() != data.n()) throw DimensionError("partition must cover the samples");
  const Matrix T = targets_of(data);
  const int d = data.d();
  const int K = static_cast<int>(T.cols());
  SampleClusteredModel model;
  model.groups = groups;
  model.num_targets = K;
  model.experts.resize(d * K, groups.group_count());
  for (int q = 0; q < groups.group_count(); ++q) {
    const auto& g = groups.groups()[q];
    const int s = static_cast<int>(g.size());
    Matrix Xq(s, d);
    Matrix Tq(s, K);
    for (int r = 0; r < s; ++r) {
      Xq.row(r) = data.X.row(g[r]);
      Tq.row(r) = T.row(g[r]);
    }
    const Matrix H =
        Xq.transpose() * Xq + (data.n() * lambda * s) * Matrix::Identity(d, d);
    const Matrix rhs = Xq.transpose() * Tq;
    Eigen::LLT<Matrix> llt(H);
    Matrix Vq;
    if (lambda > 0 && llt.info() == Eigen::Success) {
      Vq = llt.solve(rhs);
    } else {
      Vq = H.completeOrthogonalDecomposition().solve(rhs);
    }
    model.experts.col(q) = Eigen::Map<Vector>(Vq.data(), d * K);
  }
  return model;
}

CGResult cg_fit(const Dataset& data, bool over_samples, const CGConfig& config) {
  if (config.Q < 1) throw InputError("Q must be >= 1");
  if (config.max_iter < 1) throw InputError("max_iter must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const PsiProblem prob = PsiProblem::from_dataset(data, over_samples, config.lambda);
  const int m = prob.m();

  CGResult res;
  Matrix M = equivalence_from_partition(Partition::single_group(m));
  // M stays a convex combination of vertices; inner products with the
  // gradient factor are taken vertex by vertex, which is exact and cheap.
  std::vector<std::pair<double, Partition>> combo{{1.0, Partition::single_group(m)}};
  Partition last_vertex = Partition::single_group(m);
  double eps = config.epsilon;
  res.report.status = "max-iter";

  for (int t = 0; t < config.max_iter; ++t) {
    const PsiEval ev = psi_eval(prob, M);
    res.report.objective_trace.push_back(ev.value);
    if (t == 0 && eps <= 0) eps = 1e-6 * std::max(1.0, ev.value);

    last_vertex = linear_oracle_factor(ev.factor, config.Q,
                                       mix_seed(config.seed, static_cast<std::uint64_t>(t)),
                                       config.restarts);
    if (config.record_oracle_psi)
      res.oracle_psi.push_back(psi_value(prob, equivalence_from_partition(last_vertex)));

    const double inner_vertex = equivalence_inner_factor(last_vertex, ev.factor);
    double inner_iterate = 0.0;
    for (const auto& [w, p] : combo) inner_iterate += w * equivalence_inner_factor(p, ev.factor);
    const double gap = inner_vertex - inner_iterate;  // >= psi(M_t) - psi* for an exact oracle
    res.report.fw_gaps.push_back(gap);
    res.report.iterations = t + 1;
    if (gap < -1e-8 * std::max(1.0, res.report.objective_trace.front()))
      res.oracle_warning = true;

    if (gap <= eps) {
      res.report.converged = true;
      res.report.status = "converged";
      break;
    }

    const double alpha = 2.0 / (t + 2.0);
    res.report.step_sizes.push_back(alpha);
    M = (1.0 - alpha) * M + alpha * equivalence_from_partition(last_vertex);
    if (alpha == 1.0) {
      combo.clear();
    } else {
      for (auto& [w, p] : combo) w *= 1.0 - alpha;
    }
    combo.emplace_back(alpha, last_vertex);
  }

  res.partition = last_vertex;
  res.M = std::move(M);
  if (over_samples)
    res.sample_model = refit_sample_partition(data, res.partition, config.lambda);
  else
    res.feature_model = refit_feature_partition(data, res.partition, config.lambda);
  res.report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace clm
