#include "clm/losses.hpp"

#include <cmath>

namespace clm {

namespace detail {

double sign_label(double y) {
  if (y == 1.0) return 1.0;
  if (y == 0.0 || y == -1.0) return -1.0;
  throw InputError("logistic labels must be in {0,1} or {-1,+1}");
}

double log1pexp_neg(double t) {
  if (t >= 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

}  // namespace detail

namespace {

using detail::log1pexp_neg;
using detail::sign_label;

void check_predictor(const Dataset& data, const Matrix& W, int expected_cols) {
  if (W.rows() != data.d()) throw DimensionError("predictor rows must equal feature count");
  if (W.cols() != expected_cols) throw DimensionError("predictor has wrong number of columns");
}

LossEval squared(const Dataset& data, const Matrix& W, double lambda) {
  const double n = data.n();
  Vector r = data.X * W.col(0) - data.y;
  double value = r.squaredNorm() / (2.0 * n) + 0.5 * lambda * W.squaredNorm();
  Matrix grad = (data.X.transpose() * r) / n + lambda * W;
  return {value, std::move(grad)};
}

LossEval logistic(const Dataset& data, const Matrix& W, double lambda) {
  const double n = data.n();
  Vector z = data.X * W.col(0);
  double value = 0.5 * lambda * W.squaredNorm();
  Vector coef(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const double s = sign_label(data.y[i]);
    const double t = s * z[i];
    value += log1pexp_neg(t) / n;
    coef[i] = -s / (1.0 + std::exp(t));  // d/dz log(1+e^{-sz})
  }
  Matrix grad = (data.X.transpose() * coef) / n + lambda * W;
  return {value, std::move(grad)};
}

LossEval multiclass_squared(const Dataset& data, const Matrix& W, double lambda) {
  const double n = data.n();
  Matrix R = data.X * W - data.Y;
  double value = R.squaredNorm() / (2.0 * n) + 0.5 * lambda * W.squaredNorm();
  Matrix grad = (data.X.transpose() * R) / n + lambda * W;
  return {value, std::move(grad)};
}

LossEval multiclass_logistic(const Dataset& data, const Matrix& W, double lambda) {
  const double n = data.n();
  Matrix Z = data.X * W;
  Matrix S(Z.rows(), Z.cols());
  double value = 0.5 * lambda * W.squaredNorm();
  for (int i = 0; i < Z.rows(); ++i) {
    const double zmax = Z.row(i).maxCoeff();
    Eigen::RowVectorXd e = (Z.row(i).array() - zmax).exp();
    const double sum = e.sum();
    S.row(i) = e / sum;
    const double lse = zmax + std::log(sum);
    value += (lse - Z.row(i).dot(data.Y.row(i))) / n;
  }
  Matrix grad = (data.X.transpose() * (S - data.Y)) / n + lambda * W;
  return {value, std::move(grad)};
}

}  // namespace

LossEval loss_value_grad(LossKind kind, const Dataset& data, const Matrix& W, double lambda) {
  if (lambda < 0) throw InputError("lambda must be >= 0");
  switch (kind) {
    case LossKind::Squared:
      if (data.task != TaskKind::Regression) throw UnsupportedModeError("squared loss needs y");
      check_predictor(data, W, 1);
      return squared(data, W, lambda);
    case LossKind::Logistic:
      if (data.task != TaskKind::Regression)
        throw UnsupportedModeError("logistic loss needs a scalar label vector");
      check_predictor(data, W, 1);
      return logistic(data, W, lambda);
    case LossKind::MulticlassSquared:
      if (data.task == TaskKind::Regression)
        throw UnsupportedModeError("multiclass loss needs a target matrix");
      check_predictor(data, W, data.num_targets());
      return multiclass_squared(data, W, lambda);
    case LossKind::MulticlassLogistic:
      if (data.task != TaskKind::Classification)
        throw UnsupportedModeError("multiclass logistic needs one-hot targets");
      check_predictor(data, W, data.num_targets());
      return multiclass_logistic(data, W, lambda);
  }
  throw UnsupportedModeError("unknown loss kind");
}

double loss_value(LossKind kind, const Dataset& data, const Matrix& W, double lambda) {
  return loss_value_grad(kind, data, W, lambda).value;
}

double sample_clustered_objective(LossKind kind, const Dataset& data, const Matrix& experts,
                                  const Partition& groups, double lambda) {
  if (kind != LossKind::Squared && kind != LossKind::Logistic)
    throw UnsupportedModeError("groupwise objective supports scalar loss kinds");
  if (data.task != TaskKind::Regression) throw UnsupportedModeError("needs a scalar target");
  if (groups.item_count() != data.n()) throw DimensionError("partition must cover all samples");
  if (experts.rows() != data.d()) throw DimensionError("expert rows must equal feature count");
  if (experts.cols() < groups.group_count()) throw DimensionError("missing expert columns");
  const double n = data.n();
  double value = 0.0;
  for (int q = 0; q < groups.group_count(); ++q) {
    const auto& g = groups.groups()[q];
    const Vector v = experts.col(q);
    for (int i : g) {
      const double z = data.X.row(i).dot(v);
      if (kind == LossKind::Squared) {
        const double r = z - data.y[i];
        value += 0.5 * r * r / n;
      } else {
        value += log1pexp_neg(sign_label(data.y[i]) * z) / n;
      }
    }
    value += 0.5 * lambda * static_cast<double>(g.size()) * v.squaredNorm();
  }
  return value;
}

namespace {

void check_multitask_shapes(const Matrix& W, const Matrix& W_tilde) {
  if (W.rows() != W_tilde.rows() || W.cols() != W_tilde.cols())
    throw DimensionError("W and W_tilde must have matching shapes");
  if (W.cols() < 1) throw DimensionError("multitask penalty needs at least one task");
}

}  // namespace

double multitask_penalty(const Matrix& W, const Matrix& W_tilde,
                         const MultitaskPenaltyParams& params) {
  check_multitask_shapes(W, W_tilde);
  const double K = static_cast<double>(W.cols());
  const Vector colsum = W_tilde.rowwise().sum();
  // tr(Wt (11^T/K) Wt^T) = ||Wt 1||^2 / K
  const double mean_term = colsum.squaredNorm() / K;
  const Matrix centered = W_tilde.colwise() - Vector(colsum / K);
  const double between_term = centered.squaredNorm();
  const double within_term = (W - W_tilde).squaredNorm();
  return 0.5 * params.lambda_M * mean_term + 0.5 * params.lambda_B * between_term +
         0.5 * params.lambda_W * within_term;
}

double multitask_penalty_decomposed(const Matrix& W, const Matrix& centers,
                                    const Partition& task_groups,
                                    const MultitaskPenaltyParams& params) {
  if (task_groups.item_count() != W.cols())
    throw DimensionError("task partition must cover all tasks");
  if (centers.cols() < task_groups.group_count()) throw DimensionError("missing center columns");
  if (centers.rows() != W.rows()) throw DimensionError("center rows must match W");
  const double K = static_cast<double>(W.cols());
  Vector vbar = Vector::Zero(W.rows());
  for (int q = 0; q < task_groups.group_count(); ++q)
    vbar += static_cast<double>(task_groups.groups()[q].size()) * centers.col(q);
  vbar /= K;
  double mean_term = K * vbar.squaredNorm();
  double between_term = 0.0;
  double within_term = 0.0;
  for (int q = 0; q < task_groups.group_count(); ++q) {
    const auto& g = task_groups.groups()[q];
    between_term += static_cast<double>(g.size()) * (centers.col(q) - vbar).squaredNorm();
    for (int i : g) within_term += (W.col(i) - centers.col(q)).squaredNorm();
  }
  return 0.5 * params.lambda_M * mean_term + 0.5 * params.lambda_B * between_term +
         0.5 * params.lambda_W * within_term;
}

Matrix multitask_penalty_grad_W(const Matrix& W, const Matrix& W_tilde,
                                const MultitaskPenaltyParams& params) {
  check_multitask_shapes(W, W_tilde);
  return params.lambda_W * (W - W_tilde);
}

Matrix multitask_penalty_grad_Wt(const Matrix& W, const Matrix& W_tilde,
                                 const MultitaskPenaltyParams& params) {
  check_multitask_shapes(W, W_tilde);
  const double K = static_cast<double>(W.cols());
  const Vector colmean = W_tilde.rowwise().sum() / K;
  Matrix mean_part = colmean.replicate(1, W.cols());          // Wt (11^T/K)
  Matrix centered = W_tilde.colwise() - Vector(colmean);      // Wt (I - 11^T/K)
  return params.lambda_M * mean_part + params.lambda_B * centered -
         params.lambda_W * (W - W_tilde);
}

}  // namespace clm
