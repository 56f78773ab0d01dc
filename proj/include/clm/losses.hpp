#pragma once

#include "clm/types.hpp"

namespace clm {

enum class LossKind { Squared, Logistic, MulticlassSquared, MulticlassLogistic };

struct LossEval {
  double value;
  Matrix grad;  // same shape as W
};

// Regularized empirical risk (1/n) sum_i loss(y_i, W^T x_i) + (lambda/2)||W||_F^2
// and its gradient in W. W is d x 1 for the scalar kinds, d x K otherwise.
// Logistic labels may be given as {0,1} or {-1,+1}; they are mapped to signs.
LossEval loss_value_grad(LossKind kind, const Dataset& data, const Matrix& W, double lambda);
double loss_value(LossKind kind, const Dataset& data, const Matrix& W, double lambda);

// Groupwise objective (1/n) sum_q sum_{i in G_q} loss(y_i, v_q^T x_i)
//                     + (lambda/2) sum_q s_q ||v_q||^2
// for scalar loss kinds; experts holds v_q as columns.
double sample_clustered_objective(LossKind kind, const Dataset& data, const Matrix& experts,
                                  const Partition& groups, double lambda);

struct MultitaskPenaltyParams {
  double lambda_M = 0.0;  // mean of the task predictors
  double lambda_B = 0.0;  // spread of cluster centers around the mean
  double lambda_W = 0.0;  // distance of each task to its cluster center
};

// Matrix form with the centering projector P = I - 11^T/K over K tasks:
//   (lambda_M/2) tr(Wt (I-P) Wt^T) + (lambda_B/2) tr(Wt P Wt^T)
//   + (lambda_W/2) ||W - Wt||_F^2.
double multitask_penalty(const Matrix& W, const Matrix& W_tilde,
                         const MultitaskPenaltyParams& params);

// Equivalent groupwise form, where column i of W_tilde equals center v_{g(i)}:
//   (lambda_M/2) K ||vbar||^2 + (lambda_B/2) sum_q s_q ||v_q - vbar||^2
//   + (lambda_W/2) sum_q sum_{i in G_q} ||w_i - v_q||^2,  vbar = (1/K) sum_q s_q v_q.
double multitask_penalty_decomposed(const Matrix& W, const Matrix& centers,
                                    const Partition& task_groups,
                                    const MultitaskPenaltyParams& params);

Matrix multitask_penalty_grad_W(const Matrix& W, const Matrix& W_tilde,
                                const MultitaskPenaltyParams& params);
Matrix multitask_penalty_grad_Wt(const Matrix& W, const Matrix& W_tilde,
                                 const MultitaskPenaltyParams& params);

namespace detail {

// Maps {0,1} or {-1,+1} labels to signs; anything else is an input error.
double sign_label(double y);
// log(1 + exp(-t)) without overflow for large |t|.
double log1pexp_neg(double t);

}  // namespace detail

}  // namespace clm
