#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "clm/types.hpp"

namespace clm {

// ---------------------------------------------------------------------------
// Test metrics. All squared-error metrics use the same (1/2n) normalization
// as the training objectives.
// ---------------------------------------------------------------------------

double metric_mse(const Dataset& test, const Vector& w, double intercept = 0.0);
double metric_mse_multi(const Dataset& test, const Matrix& W);
// Best-expert error: every test sample picks its best predictor after the
// fact, so no test-side group labels are needed.
double metric_best_expert_mse(const Dataset& test, const Matrix& experts);
double metric_accuracy(const Dataset& test, const Matrix& W);

// ---------------------------------------------------------------------------
// Cross-validation.
// ---------------------------------------------------------------------------

struct FoldSplit {
  std::vector<int> train_idx;  // ascending original row indices
  std::vector<int> val_idx;
};
// Seeded shuffle, then stride-f assignment to validation folds.
std::vector<FoldSplit> make_folds(int n, int folds, std::uint64_t seed);
Dataset subset_rows(const Dataset& data, const std::vector<int>& idx);

// evaluate(fold_train, original indices of its rows, fold_val, lambda)
// returns a validation score (lower is better). NaN marks a failed fit.
using CvEvaluator =
    std::function<double(const Dataset&, const std::vector<int>&, const Dataset&, double)>;

struct CvSelection {
  double best_lambda = 0.0;
  std::vector<double> mean_scores;  // one per grid entry; NaN = all-fold failure
};
// Scans the grid in the given order and keeps the first strict minimum of the
// mean validation score. Solver failures (ill-conditioning, divergence) count
// as NaN folds and disqualify that lambda; if every lambda is disqualified,
// CvFailedError names the method.
CvSelection select_lambda(const Dataset& train, const std::vector<double>& grid, int folds,
                          std::uint64_t seed, const std::string& method,
                          const CvEvaluator& evaluate);

// ---------------------------------------------------------------------------
// Benchmark tables: methods x settings, mean and sample deviation over
// trials. Every trial draws its own dataset from a seed derived from
// (seed, column, trial), so cells are reproducible independently of
// scheduling or trial order.
// ---------------------------------------------------------------------------

struct CellStat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = 0.0;
  int failures = 0;                 // trials that produced no score
  std::vector<double> values;       // per-trial scores, NaN where failed
};

struct TableResult {
  std::string name;
  std::vector<std::string> methods;           // row labels
  std::vector<std::string> columns;           // column labels
  std::vector<std::vector<CellStat>> cells;   // [method][column]
};

std::string table_text(const TableResult& t);
std::string table_csv(const TableResult& t);

// Shared iteration budgets for the solvers inside a bench.
struct SolverBudget {
  int pgd_max_iter = 200;
  int cg_max_iter = 100;
  int restarts = 2;  // k-means restarts inside projections and oracles
  int am_max_alternations = 100;
  double epsilon = 1e-8;
  double cg_epsilon = 0.0;  // nonpositive = relative gap default
};

// Mixture-of-regressions robustness to noise features. Rows: plain least
// squares on the true grouping (oracle, no hyperparameter), alternating
// minimization, projected gradient, and conditional gradient; the latter two
// are polished by a few alternating steps from their recovered grouping.
// Cells are best-expert errors summed over the test set (halved), matching
// the (1/2n) metric times n_test.
struct SampleNoiseBench {
  int trials = 20;
  int n_train = 1000;
  int n_test = 100;
  int d = 8;
  int Q = 3;
  double sigma_y = 0.1;
  double sigma_d = 1.0;
  bool add_bias = true;
  std::vector<double> noise_fractions = {0.0, 0.25, 0.5, 0.75, 0.9, 0.95};
  // The per-group penalty scales with n * lambda * group size, so useful
  // lambdas sit well below the usual ridge range.
  std::vector<double> lambda_grid = {1e-7, 1e-6, 1e-5, 1e-4, 1e-3};
  int folds = 3;
  std::uint64_t seed = 0;
  SolverBudget budget;
  bool sum_over_test = true;
};
TableResult run_sample_noise_bench(const SampleNoiseBench& cfg);

// Clustered-weights recovery as the sample count grows. Rows: oracle refit,
// ridge, ridge + 1-d clustering, projected gradient, conditional gradient,
// and conditional gradient refined by projected gradient.
struct FeatureDenseBench {
  int trials = 20;
  std::vector<int> n_train = {50, 150};
  int n_test = 100;
  int d = 100;
  int Q = 5;
  double sigma = 0.5;
  double min_gap = 0.1;
  std::vector<double> lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1};
  int folds = 3;
  std::uint64_t seed = 0;
  SolverBudget budget;
};
TableResult run_feature_dense_bench(const FeatureDenseBench& cfg);

// Same design with a k-sparse true weight vector; the projected-gradient row
// uses the sparse projection with the true budget.
struct FeatureSparseBench {
  int trials = 20;
  std::vector<int> n_train = {50, 150};
  int n_test = 100;
  int d = 100;
  int k = 10;
  int Q = 5;
  double sigma = 0.5;
  double min_gap = 0.1;
  std::vector<double> lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1};
  int folds = 3;
  std::uint64_t seed = 0;
  SolverBudget budget;
};
TableResult run_feature_sparse_bench(const FeatureSparseBench& cfg);

}  // namespace clm
