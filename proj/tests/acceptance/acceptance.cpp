// Acceptance gate: one PASS/FAIL line per criterion, exit code = number of
// failures. Each check is self-contained and compares the library against
// independent references (exhaustive search, finite differences, repeated
// CLI invocations).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clm/cg.hpp"
#include "clm/clustering.hpp"
#include "clm/experiments.hpp"
#include "clm/losses.hpp"
#include "clm/pgd.hpp"
#include "clm/projections.hpp"
#include "clm/rng.hpp"
#include "clm/synthetic.hpp"
#include "clm/theory.hpp"
#include "oracles.hpp"

using namespace clm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int number, const char* title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("criterion %d (%s): %s — %s [%.1fs]\n", number, title,
              out.pass ? "PASS" : "FAIL", out.detail.c_str(), sec);
  std::fflush(stdout);
  if (!out.pass) ++failures;
}

Vector random_vector(int m, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> g;
  Vector v(m);
  for (int i = 0; i < m; ++i) v[i] = g(rng);
  return v;
}

Matrix random_matrix(int r, int c, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// --------------------------------------------------------------------------
// 1. Exact sparse-clustered projection vs. brute force, plus cost scaling.
// --------------------------------------------------------------------------

double median_time_sparse_projection(int k, int Q, int repeats) {
  const int d = 2 * k;
  std::vector<double> times;
  for (int rep = 0; rep < 5; ++rep) {
    const Vector x = random_vector(d, mix_seed(0x7131, k, rep));
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) {
      volatile double sink = project_sparse_clustered(x, k, Q).distance2;
      (void)sink;
    }
    times.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

Outcome criterion1() {
  auto rng = make_rng(0xacc1);
  double worst = 0.0;
  for (int inst = 0; inst < 2000; ++inst) {
    const int d = 2 + static_cast<int>(rng() % 7);  // 2..8
    Vector x = random_vector(d, mix_seed(0xacc1, inst));
    switch (inst % 6) {
      case 0: x = x.cwiseAbs(); break;
      case 1: x = -x.cwiseAbs(); break;
      case 2: x[static_cast<int>(rng() % d)] = 0.0; break;
      case 3: x[0] = x[d - 1]; break;
      case 4: x *= 100.0; break;
      default: break;
    }
    const int k = 1 + static_cast<int>(rng() % std::min(5, d));
    const int Q = 1 + static_cast<int>(rng() % 3);
    const ProjectionResult r = project_sparse_clustered(x, k, Q);
    const double ref = oracle::sparse_cluster_fit_exhaustive(x, k, Q);
    worst = std::max(worst, std::abs(r.distance2 - ref));
    if (worst > 1e-9)
      return {false, fmt("instance %d (d=%d k=%d Q=%d): got %.12g, brute force %.12g",
                         inst, d, k, Q, r.distance2, ref)};
  }

  const double t50 = median_time_sparse_projection(50, 3, 60);
  const double t200 = median_time_sparse_projection(200, 3, 60);
  const double slope = std::log(t200 / t50) / std::log(4.0);
  const bool scaling_ok = slope >= 1.3 && slope <= 2.7;
  return {scaling_ok,
          fmt("2000 instances match brute force (max |diff| %.2e); cost slope in k: %.2f "
              "(want ~2)",
              worst, slope)};
}

// --------------------------------------------------------------------------
// 2. Exact 1-d clustering vs. set-partition enumeration.
// --------------------------------------------------------------------------

Outcome criterion2() {
  auto rng = make_rng(0xacc2);
  double worst = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int m = 2 + static_cast<int>(rng() % 9);  // 2..10
    Vector x = random_vector(m, mix_seed(0xacc2, inst));
    if (inst % 5 == 0) x[0] = x[m - 1];
    const int Q = 1 + static_cast<int>(rng() % 4);
    const double got = kmeans_1d_exact(x, Q).cost;
    const double ref = oracle::cluster_fit_exhaustive(x, Q);
    worst = std::max(worst, std::abs(got - ref));
    if (worst > 1e-10)
      return {false, fmt("instance %d (m=%d Q=%d): got %.12g, enumeration %.12g", inst, m,
                         Q, got, ref)};
  }
  return {true, fmt("1000 instances match enumeration (max |diff| %.2e)", worst)};
}

// --------------------------------------------------------------------------
// 3. Analytic gradients vs. central finite differences.
// --------------------------------------------------------------------------

Outcome criterion3() {
  double worst = 0.0;
  auto update = [&](double analytic_vs_fd) { worst = std::max(worst, analytic_vs_fd); };

  for (int inst = 0; inst < 100; ++inst) {
    const int n = 6, d = 4, K = 3;
    const Matrix X = random_matrix(n, d, mix_seed(0xacc3, inst, 1));
    const double lambda = 0.25;

    {
      const Vector y = random_vector(n, mix_seed(0xacc3, inst, 2));
      const Dataset data = Dataset::regression(X, y);
      const Matrix W = random_matrix(d, 1, mix_seed(0xacc3, inst, 3));
      const LossEval e = loss_value_grad(LossKind::Squared, data, W, lambda);
      const Matrix fd = oracle::fd_gradient(
          [&](const Matrix& V) { return loss_value(LossKind::Squared, data, V, lambda); },
          W);
      update((e.grad - fd).norm() / std::max(1.0, fd.norm()));
    }
    {
      auto lrng = make_rng(mix_seed(0xacc3, inst, 4));
      Vector y(n);
      for (int i = 0; i < n; ++i) y[i] = (lrng() % 2) ? 1.0 : -1.0;
      const Dataset data = Dataset::regression(X, y);
      const Matrix W = random_matrix(d, 1, mix_seed(0xacc3, inst, 5));
      const LossEval e = loss_value_grad(LossKind::Logistic, data, W, lambda);
      const Matrix fd = oracle::fd_gradient(
          [&](const Matrix& V) { return loss_value(LossKind::Logistic, data, V, lambda); },
          W);
      update((e.grad - fd).norm() / std::max(1.0, fd.norm()));
    }
    for (LossKind kind : {LossKind::MulticlassSquared, LossKind::MulticlassLogistic}) {
      std::vector<int> labels(n);
      for (int i = 0; i < n; ++i) labels[i] = i % K;
      const Dataset data = Dataset::classification_from_labels(X, labels, K);
      const Matrix W = random_matrix(d, K, mix_seed(0xacc3, inst, 6 + (int)kind));
      const LossEval e = loss_value_grad(kind, data, W, lambda);
      const Matrix fd = oracle::fd_gradient(
          [&](const Matrix& V) { return loss_value(kind, data, V, lambda); }, W);
      update((e.grad - fd).norm() / std::max(1.0, fd.norm()));
    }

    // psi over features and over samples: directional derivative along a
    // random symmetric direction at an interior point of the hull.
    for (bool over_samples : {false, true}) {
      const Vector y = random_vector(n, mix_seed(0xacc3, inst, 8));
      const PsiProblem prob =
          PsiProblem::from_dataset(Dataset::regression(X, y), over_samples, 0.4);
      const int m = prob.m();
      const Matrix M =
          0.5 * equivalence_from_partition(Partition::single_group(m)) +
          0.5 * Matrix::Identity(m, m);
      const PsiEval e = psi_eval(prob, M, true);
      const Matrix R = random_matrix(m, m, mix_seed(0xacc3, inst, 9 + over_samples));
      const Matrix D = 0.5 * (R + R.transpose());
      const double h = 1e-6;
      const double fd = (psi_value(prob, M + h * D) - psi_value(prob, M - h * D)) / (2 * h);
      const double an = -(e.P.array() * D.array()).sum();
      update(std::abs(an - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return {worst <= 1e-4, fmt("losses and both psi kinds vs finite differences, 100 "
                             "instances each (worst relative error %.2e)",
                             worst)};
}

// --------------------------------------------------------------------------
// 4. Noiseless recovery and the per-iteration error bound.
// --------------------------------------------------------------------------

Outcome criterion4() {
  int recovered = 0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    FeatureClusterSpec spec;
    spec.n_train = 400;
    spec.n_test = 1;
    spec.d = 20;
    spec.Q = 3;
    spec.sigma = 0.0;
    spec.seed = mix_seed(0xacc4, s);
    const FeatureClusterData data = make_feature_cluster_data(spec);

    PGDConfig cfg;
    cfg.hp.Q = 3;
    cfg.hp.epsilon = 0.0;
    cfg.hp.max_iter = 80;
    cfg.theory_mode = true;
    try {
      const PGDResult res = pgd_fit(data.train, Variant::FeatureCluster, cfg);
      if ((res.W.col(0) - data.w_star).norm() <= 1e-4) ++recovered;
    } catch (const DivergedError&) {
    }
  }
  const bool part1 = recovered >= 45;

  int violations = 0, contractive = 0;
  for (int s = 0; s < seeds; ++s) {
    const Matrix X = random_matrix(2000, 8, mix_seed(0xacc4b, s, 1));
    Vector w_star(8);
    auto rng = make_rng(mix_seed(0xacc4b, s, 2));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double v0 = u(rng), v1 = u(rng);
    for (int i = 0; i < 8; ++i) w_star[i] = (i < 4) ? v0 : v1;
    const ConvergenceCheck c =
        verify_convergence_bound(X, w_star, 0.1, 2, 12, mix_seed(0xacc4b, s, 3));
    if (c.constants.rho < 1.0) {
      ++contractive;
      if (!c.bound_holds) ++violations;
    }
  }
  const bool part2 = violations == 0 && contractive > 0;
  return {part1 && part2,
          fmt("noiseless exact recovery on %d/%d seeds (need 45); bound violations %d over "
              "%d contractive noisy runs",
              recovered, seeds, violations, contractive)};
}

// --------------------------------------------------------------------------
// 5. Clustered-weights table at desk scale.
// --------------------------------------------------------------------------

Outcome criterion5() {
  FeatureDenseBench cfg;
  cfg.trials = 20;
  cfg.n_train = {50, 150};
  cfg.n_test = 25;
  cfg.d = 100;
  cfg.Q = 5;
  // Separation consistent with the reported regime: the reference results
  // show the weight-clustering step making almost no assignment mistakes,
  // which needs value gaps a few times the per-coordinate estimation noise.
  cfg.min_gap = 0.35;
  cfg.folds = 3;
  cfg.seed = 0xacc5;
  cfg.budget.pgd_max_iter = 150;
  cfg.budget.cg_max_iter = 40;
  cfg.budget.restarts = 2;
  const TableResult t = run_feature_dense_bench(cfg);

  auto mean = [&](const char* method, int col) {
    const auto it = std::find(t.methods.begin(), t.methods.end(), method);
    return t.cells[it - t.methods.begin()][col].mean;
  };
  const double pg = mean("pg", 1), ls = mean("ls", 1);
  bool monotone = true;
  std::string worst_method;
  for (std::size_t m = 0; m < t.methods.size(); ++m)
    if (!(t.cells[m][0].mean > t.cells[m][1].mean)) {
      monotone = false;
      worst_method = t.methods[m];
    }
  const bool pass = pg >= 0.05 && pg <= 0.20 && ls >= 0.5 && ls <= 1.0 && monotone;
  std::string detail = fmt("pg@n=150 %.3f (want [0.05,0.20]), ls@n=150 %.3f (want "
                           "[0.5,1.0]), every method improves from n=50 to n=150: %s",
                           pg, ls, monotone ? "yes" : ("no: " + worst_method).c_str());
  return {pass, detail};
}

// --------------------------------------------------------------------------
// 6. Mixture-of-regressions noise table at desk scale.
// --------------------------------------------------------------------------

Outcome criterion6() {
  SampleNoiseBench cfg;
  cfg.trials = 10;
  cfg.n_train = 300;
  cfg.n_test = 100;
  cfg.d = 8;
  cfg.Q = 3;
  cfg.noise_fractions = {0.0, 0.95};
  cfg.folds = 3;
  cfg.seed = 0xacc6;
  cfg.budget.pgd_max_iter = 60;
  cfg.budget.cg_max_iter = 60;
  cfg.budget.restarts = 5;
  cfg.budget.am_max_alternations = 60;
  const TableResult t = run_sample_noise_bench(cfg);

  const double oracle0 = t.cells[0][0].mean;
  bool degrade = true;
  std::string bad;
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    const double r = t.cells[m][1].mean / t.cells[m][0].mean;
    if (!(r >= 10.0)) {
      degrade = false;
      bad += (bad.empty() ? "" : ",") + t.methods[m] + fmt("=%.1fx", r);
    }
  }
  const bool pass = oracle0 >= 0.3 && oracle0 <= 0.8 && degrade;
  return {pass, fmt("oracle@p=0 %.3f (want [0.3,0.8]); every method degrades >=10x at "
                    "p=0.95: %s",
                    oracle0, degrade ? "yes" : ("no: " + bad).c_str())};
}

// --------------------------------------------------------------------------
// 7. Duality gaps really certify suboptimality.
// --------------------------------------------------------------------------

Outcome criterion7() {
  double min_gap = 0.0, worst_slack = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const int m = 5 + inst % 3;  // 5..7 features
    const Matrix X = random_matrix(12, m, mix_seed(0xacc7, inst, 1));
    const Vector y = random_vector(12, mix_seed(0xacc7, inst, 2));
    const Dataset data = Dataset::regression(X, y);
    const int Q = 2 + inst % 2;
    const double lambda = 0.3;

    double best = std::numeric_limits<double>::infinity();
    const PsiProblem prob = PsiProblem::from_dataset(data, false, lambda);
    for (const Partition& p : enumerate_partitions(m, Q))
      best = std::min(best, psi_value(prob, equivalence_from_partition(p)));

    CGConfig cfg;
    cfg.Q = Q;
    cfg.lambda = lambda;
    cfg.epsilon = 1e-12;
    cfg.max_iter = 40;
    const CGResult res = cg_fit(data, false, cfg);
    for (std::size_t t = 0; t < res.report.fw_gaps.size(); ++t) {
      const double gap = res.report.fw_gaps[t];
      const double subopt = res.report.objective_trace[t] - best;
      min_gap = std::min(min_gap, gap);
      worst_slack = std::min(worst_slack, gap - subopt);
      if (gap < -1e-10)
        return {false, fmt("instance %d iteration %zu: negative gap %.3e", inst, t, gap)};
      if (gap + 1e-9 < subopt)
        return {false, fmt("instance %d iteration %zu: gap %.6g below suboptimality %.6g",
                           inst, t, gap, subopt)};
    }
  }
  return {true, fmt("gap >= suboptimality at every iteration on 10 enumerable instances "
                    "(min gap %.1e, min slack %.1e)",
                    min_gap, worst_slack)};
}

// --------------------------------------------------------------------------
// 8. Counting bounds.
// --------------------------------------------------------------------------

Outcome criterion8() {
  for (int d = 1; d <= 10; ++d)
    for (int Q = 1; Q <= std::min(4, d); ++Q) {
      const std::uint64_t enumerated = enumerate_partitions_exact(d, Q).size();
      const StirlingBounds b = stirling_bounds(d, Q);
      if (b.value != enumerated)
        return {false, fmt("S(%d,%d): closed form %llu but enumeration %llu", d, Q,
                           (unsigned long long)b.value, (unsigned long long)enumerated)};
      if (!b.simple_holds || b.lower_simple > (double)enumerated ||
          (double)enumerated > b.upper)
        return {false, fmt("envelope fails at d=%d Q=%d: %.3g <= %llu <= %.3g", d, Q,
                           b.lower_simple, (unsigned long long)enumerated, b.upper)};
    }
  for (int d = 6; d <= 12; ++d)
    for (int k = 3; k <= std::min(6, d); ++k)
      for (int Q = 3; Q <= k; ++Q) {
        const SparseCountBound s = sparse_subspace_count(d, k, Q);
        if (!s.holds)
          return {false, fmt("sparse count bound fails at d=%d k=%d Q=%d: %llu > %.3g", d,
                             k, Q, (unsigned long long)s.count, s.bound)};
      }
  return {true, "partition envelope holds for d <= 10, Q <= 4; sparse pattern bound holds "
                "for k,Q >= 3"};
}

// --------------------------------------------------------------------------
// 9. CLI determinism across invocations and thread counts.
// --------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion9() {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("clm_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path d;
    ~Cleanup() { std::filesystem::remove_all(d); }
  } cleanup{dir};

  const std::string cli = CLM_CLI_PATH;
  const std::string train = (dir / "train.csv").string();
  const std::string test = (dir / "test.csv").string();
  auto shell = [&](const std::string& args) {
    return std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
  };

  if (shell("generate --kind sample --n-train 40 --n-test 10 --d 3 --q 2 --seed 7"
            " --out-train " + train + " --out-test " + test) != 0)
    return {false, "generate failed"};

  const std::vector<std::pair<std::string, std::string>> cases = {
      {"fit_pgd", "fit --train " + train + " --test " + test +
                      " --solver pgd --variant sample --q 2 --lambda 1e-3 --seed 3"},
      {"fit_cg", "fit --train " + train + " --solver cg --variant feature --q 2"
                 " --lambda 1e-2 --cg-max-iter 20 --seed 5 --refine pgd"},
      {"cv", "cv --train " + train + " --solver lsk --variant feature --q 2"
             " --lambdas 1e-3 1e-1 --folds 2 --seed 11"},
      {"bench", "bench --table sample-noise --trials 2 --n-train 36 --n-test 12"
                " --noise-fractions 0 --lambdas 1e-3 --folds 2 --seed 13"},
      {"theory", "theory --check stirling --d 9 --q 3"},
  };

  for (const auto& [name, args] : cases) {
    std::vector<std::string> outputs;
    for (const std::string threads : {"1", "4", "1"}) {
      const fs::path out = dir / (name + "_" + std::to_string(outputs.size()) + ".json");
      const std::string cmd = args + " --threads " + threads + " --out " + out.string();
      if (shell(cmd) != 0) return {false, name + ": CLI exited nonzero"};
      outputs.push_back(slurp(out));
      if (outputs.back().empty()) return {false, name + ": empty output"};
    }
    if (outputs[0] != outputs[1] || outputs[0] != outputs[2])
      return {false, name + ": outputs differ across runs or thread counts"};
  }
  return {true, fmt("%zu CLI commands byte-identical across repeats and across "
                    "--threads 1/4",
                    cases.size())};
}

}  // namespace

int main() {
  run(1, "sparse clustered projection exactness and cost", criterion1);
  run(2, "1-d clustering exactness", criterion2);
  run(3, "gradient correctness", criterion3);
  run(4, "noiseless recovery and error bound", criterion4);
  run(5, "clustered-weights table", criterion5);
  run(6, "noise-robustness table", criterion6);
  run(7, "duality-gap certificate", criterion7);
  run(8, "counting bounds", criterion8);
  run(9, "CLI determinism", criterion9);
  if (failures == 0)
    std::printf("all 9 criteria passed\n");
  else
    std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
