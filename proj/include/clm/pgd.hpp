#pragma once

#include <cstdint>
#include <optional>

#include "clm/losses.hpp"
#include "clm/solver_report.hpp"
#include "clm/types.hpp"

namespace clm {

enum class Variant {
  FeatureCluster,            // w in R^d, entries share Q values
  FeatureClusterMulticlass,  // W in R^{d x K}, rows share Q value rows
  SparseFeatureCluster,      // w k-sparse with Q shared values on the support
  SampleCluster,             // one predictor per sample, clustered across samples
  Multitask                  // per-task predictors tied to clustered anchors
};

enum class InitKind {
  Default,           // per variant: ridge + clustering warm start where sensible
  Zeros,
  LeastSquaresKMeans,
  Warm               // caller-provided matrix in PGDConfig::warm_start
};

struct PGDConfig {
  LossKind loss = LossKind::Squared;
  Hyperparams hp;
  LineSearchParams line_search;
  InitKind init = InitKind::Default;
  std::optional<Matrix> warm_start;
  // Unit gradient step, no line search, zero init: the regime of the
  // convergence analysis. Iterate recording is useful in this mode.
  bool theory_mode = false;
  bool record_iterates = false;
  int kmeans_restarts = 5;
};

struct PGDResult {
  Matrix W;            // final feasible iterate (see the fit functions)
  Matrix W_tilde;      // multitask anchors; empty otherwise
  Partition partition;
  Matrix values;       // cluster representatives, one row per group
  double intercept = 0.0;
  std::optional<SparseClusteredModel> sparse;
  SolverReport report;
  std::vector<Matrix> iterates;  // filled when record_iterates

  ClusteredLinearModel feature_model() const;
  SampleClusteredModel sample_model(int num_targets = 1) const;
};

// Projected gradient over the chosen feasible set. `variant` must be one of
// the feature variants; W is d x K (K = 1 for scalar losses) and the
// partition is over features.
PGDResult pgd_fit(const Dataset& data, Variant variant, const PGDConfig& config);

// One linear predictor per sample, columns of W (d x n, or dK x n for
// classification) clustered into Q groups; the partition is over samples.
PGDResult pgd_fit_sample_cluster(const Dataset& data, const PGDConfig& config);

// Joint descent on per-task weights W and anchors W_tilde (both d x K);
// anchors are clustered into Q groups, W is free. The partition is over
// tasks.
PGDResult pgd_fit_multitask(const Dataset& data, const PGDConfig& config);

}  // namespace clm
