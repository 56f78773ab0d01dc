#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "clm/types.hpp"

namespace clm {

// Mixture-of-regressions generator: samples fall into Q balanced groups
// (round-robin), each with its own linear predictor drawn from N(0, I) over
// the informative features and the bias column. Noise features enter X but
// carry zero weight everywhere.
struct SampleClusterSpec {
  int n_train = 1000;
  int n_test = 100;
  int d = 8;           // informative features
  int d_noise = 0;     // pure-noise features appended after the bias column
  int Q = 3;
  double sigma_y = 0.1;  // label noise
  double sigma_d = 1.0;  // feature scale
  bool add_bias = true;  // constant column between informative and noise block
  std::uint64_t seed = 0;

  int total_features() const { return d + (add_bias ? 1 : 0) + d_noise; }
};

// d_noise giving noise fraction p of all feature columns: p total / informative.
int noise_features_for_fraction(double p, int d_informative);

struct SampleClusterData {
  Dataset train;
  Dataset test;
  Partition train_groups;
  Partition test_groups;
  Matrix experts;  // total_features x Q true predictors
};
SampleClusterData make_sample_cluster_data(const SampleClusterSpec& spec);

// Clustered-weights generator: w_star carries Q distinct values, drawn
// uniformly from [-1, 1] and redrawn until pairwise gaps reach min_gap, over
// balanced feature blocks. With a sparsity budget k only a random support of
// that size carries values; the rest of w_star is zero.
struct FeatureClusterSpec {
  int n_train = 150;
  int n_test = 100;
  int d = 100;
  int Q = 5;
  std::optional<int> k;  // support size; unset = dense
  double sigma = 0.5;    // label noise
  double min_gap = 0.1;
  std::uint64_t seed = 0;
};

struct FeatureClusterData {
  Dataset train;
  Dataset test;
  Partition feature_groups;  // value groups; off-support features form one extra group
  Vector w_star;
  std::vector<int> support;  // ascending; all features when dense
  Vector values;             // the Q distinct values
};
FeatureClusterData make_feature_cluster_data(const FeatureClusterSpec& spec);

}  // namespace clm
