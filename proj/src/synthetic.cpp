#include "clm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "clm/rng.hpp"

namespace clm {

namespace {

// substream tags for the per-spec RNG
enum : std::uint64_t {
  kTrainX = 1,
  kTrainNoise = 2,
  kTestX = 3,
  kTestNoise = 4,
  kTruth = 5,
  kSupport = 6
};

Matrix gaussian_matrix(int rows, int cols, double scale, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = scale * g(rng);
  return M;
}

}  // namespace

int noise_features_for_fraction(double p, int d_informative) {
  if (p < 0.0 || p >= 1.0) throw InputError("noise fraction must be in [0, 1)");
  return static_cast<int>(std::lround(p * d_informative / (1.0 - p)));
}

SampleClusterData make_sample_cluster_data(const SampleClusterSpec& spec) {
  if (spec.n_train < spec.Q || spec.Q < 1) throw InputError("need at least Q training samples");
  if (spec.n_test < 1 || spec.d < 1 || spec.d_noise < 0) throw InputError("bad generator sizes");
  const int D = spec.total_features();
  const int informative = spec.d + (spec.add_bias ? 1 : 0);

  SampleClusterData out;
  out.experts = Matrix::Zero(D, spec.Q);
  out.experts.topRows(informative) =
      gaussian_matrix(informative, spec.Q, 1.0, mix_seed(spec.seed, kTruth));

  auto build = [&](int n, std::uint64_t x_tag, std::uint64_t noise_tag, Partition& groups) {
    Matrix X(n, D);
    const Matrix R =
        gaussian_matrix(n, spec.d + spec.d_noise, spec.sigma_d, mix_seed(spec.seed, x_tag));
    X.leftCols(spec.d) = R.leftCols(spec.d);
    if (spec.add_bias) X.col(spec.d).setOnes();
    X.rightCols(spec.d_noise) = R.rightCols(spec.d_noise);

    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i % spec.Q;
    groups = Partition::from_labels(labels);

    auto rng = make_rng(mix_seed(spec.seed, noise_tag));
    std::normal_distribution<double> g(0.0, 1.0);
    Vector y(n);
    for (int i = 0; i < n; ++i)
      y[i] = X.row(i).dot(out.experts.col(labels[i])) + spec.sigma_y * g(rng);
    return Dataset::regression(std::move(X), std::move(y));
  };

  out.train = build(spec.n_train, kTrainX, kTrainNoise, out.train_groups);
  out.test = build(spec.n_test, kTestX, kTestNoise, out.test_groups);
  return out;
}

FeatureClusterData make_feature_cluster_data(const FeatureClusterSpec& spec) {
  if (spec.d < 1 || spec.Q < 1 || spec.n_train < 1 || spec.n_test < 1)
    throw InputError("bad generator sizes");
  const int k = spec.k.value_or(spec.d);
  if (k < spec.Q || k > spec.d) throw InputError("support size must be in [Q, d]");
  if (spec.min_gap * (spec.Q - 1) >= 2.0)
    throw InputError("min_gap is infeasible for Q values in [-1, 1]");

  FeatureClusterData out;

  // distinct values with pairwise gaps: redraw the whole set until it fits
  auto rng = make_rng(mix_seed(spec.seed, kTruth));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  out.values.resize(spec.Q);
  for (int attempt = 0;; ++attempt) {
    if (attempt > 100000) throw InputError("could not satisfy min_gap; lower it or Q");
    for (int q = 0; q < spec.Q; ++q) out.values[q] = unif(rng);
    bool ok = true;
    for (int a = 0; a < spec.Q && ok; ++a)
      for (int b = a + 1; b < spec.Q && ok; ++b)
        ok = std::abs(out.values[a] - out.values[b]) >= spec.min_gap;
    if (ok) break;
  }

  out.support.resize(spec.d);
  for (int j = 0; j < spec.d; ++j) out.support[j] = j;
  if (k < spec.d) {
    auto srng = make_rng(mix_seed(spec.seed, kSupport));
    std::shuffle(out.support.begin(), out.support.end(), srng);
    out.support.resize(k);
    std::sort(out.support.begin(), out.support.end());
  }

  // balanced blocks of the (sorted) support share a value
  std::vector<int> labels(spec.d, spec.Q);  // off-support features
  out.w_star = Vector::Zero(spec.d);
  for (int idx = 0; idx < k; ++idx) {
    const int g = static_cast<int>((static_cast<long long>(idx) * spec.Q) / k);
    labels[out.support[idx]] = g;
    out.w_star[out.support[idx]] = out.values[g];
  }
  out.feature_groups = Partition::from_labels(labels);

  auto build = [&](int n, std::uint64_t x_tag, std::uint64_t noise_tag) {
    Matrix X = gaussian_matrix(n, spec.d, 1.0, mix_seed(spec.seed, x_tag));
    auto nrng = make_rng(mix_seed(spec.seed, noise_tag));
    std::normal_distribution<double> g(0.0, 1.0);
    Vector y = X * out.w_star;
    for (int i = 0; i < n; ++i) y[i] += spec.sigma * g(nrng);
    return Dataset::regression(std::move(X), std::move(y));
  };
  out.train = build(spec.n_train, kTrainX, kTrainNoise);
  out.test = build(spec.n_test, kTestX, kTestNoise);
  return out;
}

}  // namespace clm
