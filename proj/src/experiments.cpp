#include "clm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "clm/baselines.hpp"
#include "clm/cg.hpp"
#include "clm/parallel.hpp"
#include "clm/pgd.hpp"
#include "clm/rng.hpp"
#include "clm/synthetic.hpp"

namespace clm {

// ---------------------------------------------------------------------------
// Metrics.
// ---------------------------------------------------------------------------

double metric_mse(const Dataset& test, const Vector& w, double intercept) {
  if (test.task != TaskKind::Regression) throw UnsupportedModeError("needs a scalar target");
  if (w.size() != test.d()) throw DimensionError("weight length must match features");
  Vector r = test.X * w;
  r.array() += intercept;
  r -= test.y;
  return r.squaredNorm() / (2.0 * test.n());
}

double metric_mse_multi(const Dataset& test, const Matrix& W) {
  if (test.task == TaskKind::Regression) throw UnsupportedModeError("needs a target matrix");
  if (W.rows() != test.d() || W.cols() != test.Y.cols())
    throw DimensionError("weight shape must match features x targets");
  return (test.X * W - test.Y).squaredNorm() / (2.0 * test.n());
}

double metric_best_expert_mse(const Dataset& test, const Matrix& experts) {
  if (test.task != TaskKind::Regression) throw UnsupportedModeError("needs a scalar target");
  if (experts.rows() != test.d()) throw DimensionError("expert rows must match features");
  const Matrix Z = test.X * experts;  // n x Q
  double total = 0.0;
  for (int i = 0; i < test.n(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int q = 0; q < Z.cols(); ++q) {
      const double r = Z(i, q) - test.y[i];
      best = std::min(best, r * r);
    }
    total += best;
  }
  return total / (2.0 * test.n());
}

double metric_accuracy(const Dataset& test, const Matrix& W) {
  if (test.task != TaskKind::Classification)
    throw UnsupportedModeError("accuracy needs one-hot targets");
  if (W.rows() != test.d() || W.cols() != test.Y.cols())
    throw DimensionError("weight shape must match features x classes");
  const Matrix Z = test.X * W;
  int hits = 0;
  for (int i = 0; i < test.n(); ++i) {
    int pred = 0, truth = 0;
    Z.row(i).maxCoeff(&pred);
    test.Y.row(i).maxCoeff(&truth);
    hits += pred == truth;
  }
  return static_cast<double>(hits) / test.n();
}

// ---------------------------------------------------------------------------
// Cross-validation.
// ---------------------------------------------------------------------------

std::vector<FoldSplit> make_folds(int n, int folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) throw InputError("fold count must be in [2, n]");
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  auto rng = make_rng(mix_seed(seed, 0xf01d5));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<FoldSplit> out(folds);
  for (int i = 0; i < n; ++i) out[i % folds].val_idx.push_back(order[i]);
  for (int f = 0; f < folds; ++f) {
    auto& s = out[f];
    std::sort(s.val_idx.begin(), s.val_idx.end());
    s.train_idx.reserve(n - s.val_idx.size());
    std::size_t p = 0;
    for (int i = 0; i < n; ++i) {
      if (p < s.val_idx.size() && s.val_idx[p] == i)
        ++p;
      else
        s.train_idx.push_back(i);
    }
  }
  return out;
}

Dataset subset_rows(const Dataset& data, const std::vector<int>& idx) {
  Matrix X(static_cast<int>(idx.size()), data.d());
  for (std::size_t r = 0; r < idx.size(); ++r) X.row(static_cast<int>(r)) = data.X.row(idx[r]);
  if (data.task == TaskKind::Regression) {
    Vector y(static_cast<int>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) y[static_cast<int>(r)] = data.y[idx[r]];
    return Dataset::regression(std::move(X), std::move(y));
  }
  Matrix Y(static_cast<int>(idx.size()), data.Y.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) Y.row(static_cast<int>(r)) = data.Y.row(idx[r]);
  return data.task == TaskKind::Classification ? Dataset::classification(std::move(X), std::move(Y))
                                               : Dataset::multitask(std::move(X), std::move(Y));
}

CvSelection select_lambda(const Dataset& train, const std::vector<double>& grid, int folds,
                          std::uint64_t seed, const std::string& method,
                          const CvEvaluator& evaluate) {
  if (grid.empty()) throw InputError("empty lambda grid");
  const auto splits = make_folds(train.n(), folds, seed);
  std::vector<std::pair<Dataset, Dataset>> fold_data;
  fold_data.reserve(splits.size());
  for (const auto& s : splits)
    fold_data.emplace_back(subset_rows(train, s.train_idx), subset_rows(train, s.val_idx));

  CvSelection sel;
  sel.mean_scores.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  bool have_best = false;
  double best_score = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    bool ok = true;
    for (std::size_t f = 0; f < splits.size() && ok; ++f) {
      double score;
      try {
        score = evaluate(fold_data[f].first, splits[f].train_idx, fold_data[f].second, grid[g]);
      } catch (const IllConditionedError&) {
        score = std::numeric_limits<double>::quiet_NaN();
      } catch (const DivergedError&) {
        score = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(score)) ok = false;
      sum += score;
    }
    if (!ok) continue;
    const double mean = sum / static_cast<double>(splits.size());
    sel.mean_scores[g] = mean;
    if (!have_best || mean < best_score) {
      have_best = true;
      best_score = mean;
      sel.best_lambda = grid[g];
    }
  }
  if (!have_best)
    throw CvFailedError("every lambda failed cross-validation", method);
  return sel;
}

// ---------------------------------------------------------------------------
// Table plumbing.
// ---------------------------------------------------------------------------

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t index_seed(const std::vector<int>& idx) {
  std::uint64_t h = mix_seed(0x69647873, idx.size());
  for (int i : idx) h = mix_seed(h, static_cast<std::uint64_t>(i));
  return h;
}

std::vector<int> identity_idx(int n) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

TableResult init_table(std::string name, std::vector<std::string> methods,
                       std::vector<std::string> columns, int trials) {
  if (trials < 1) throw InputError("need at least one trial");
  TableResult t;
  t.name = std::move(name);
  t.methods = std::move(methods);
  t.columns = std::move(columns);
  t.cells.assign(t.methods.size(), std::vector<CellStat>(t.columns.size()));
  for (auto& row : t.cells)
    for (auto& cell : row) cell.values.assign(trials, kNaN);
  return t;
}

void finalize_stats(TableResult& t) {
  for (auto& row : t.cells) {
    for (auto& cell : row) {
      double sum = 0.0;
      int ok = 0;
      for (double v : cell.values) {
        if (std::isfinite(v)) {
          sum += v;
          ++ok;
        } else {
          ++cell.failures;
        }
      }
      if (ok == 0) continue;
      cell.mean = sum / ok;
      if (ok >= 2) {
        double ss = 0.0;
        for (double v : cell.values)
          if (std::isfinite(v)) ss += (v - cell.mean) * (v - cell.mean);
        cell.stddev = std::sqrt(ss / (ok - 1));
      }
    }
  }
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// Runs fit_score for every method on every (column, trial) job. fit_score
// must derive all randomness from the seeds it is handed, so cells come out
// identical for any thread count.
using MethodEval = std::function<double(int method, int col, int trial)>;

void fill_cells(TableResult& t, int trials, const MethodEval& run) {
  const auto cols = static_cast<std::int64_t>(t.columns.size());
  parallel_for(cols * trials, [&](std::int64_t job) {
    const int c = static_cast<int>(job / trials);
    const int trial = static_cast<int>(job % trials);
    for (std::size_t m = 0; m < t.methods.size(); ++m) {
      double score = kNaN;
      try {
        score = run(static_cast<int>(m), c, trial);
      } catch (const std::exception&) {
        // a failed trial shows up as a NaN cell value and a failure count
      }
      t.cells[m][c].values[trial] = score;
    }
  });
  finalize_stats(t);
}

}  // namespace

std::string table_text(const TableResult& t) {
  std::string out = t.name + "\n";
  std::size_t w = 8;
  for (const auto& m : t.methods) w = std::max(w, m.size() + 2);
  auto pad = [&](const std::string& s, std::size_t width) {
    std::string r = s;
    r.resize(std::max(r.size(), width), ' ');
    return r;
  };
  out += pad("method", w);
  for (const auto& c : t.columns) out += pad(c, 20);
  out += "\n";
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    out += pad(t.methods[m], w);
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& cell = t.cells[m][c];
      std::string s = std::isfinite(cell.mean)
                          ? format_double("%.4g", cell.mean) + "+-" + format_double("%.4g", cell.stddev)
                          : std::string("n/a");
      if (cell.failures > 0) s += " (" + std::to_string(cell.failures) + " fail)";
      out += pad(s, 20);
    }
    out += "\n";
  }
  return out;
}

std::string table_csv(const TableResult& t) {
  std::string out = "method";
  for (const auto& c : t.columns)
    out += "," + c + " mean," + c + " std," + c + " failures";
  out += "\n";
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    out += t.methods[m];
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& cell = t.cells[m][c];
      out += "," + format_double("%.10g", cell.mean) + "," + format_double("%.10g", cell.stddev) +
             "," + std::to_string(cell.failures);
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mixture-of-regressions noise sweep.
// ---------------------------------------------------------------------------

TableResult run_sample_noise_bench(const SampleNoiseBench& cfg) {
  std::vector<std::string> columns;
  for (double p : cfg.noise_fractions) columns.push_back("p=" + format_double("%g", p));
  TableResult t = init_table("sample-noise", {"oracle", "am", "pg", "cg"}, std::move(columns),
                             cfg.trials);

  fill_cells(t, cfg.trials, [&](int method, int c, int trial) {
    SampleClusterSpec spec;
    spec.n_train = cfg.n_train;
    spec.n_test = cfg.n_test;
    spec.d = cfg.d;
    spec.d_noise =
        noise_features_for_fraction(cfg.noise_fractions[c], cfg.d + (cfg.add_bias ? 1 : 0));
    spec.Q = cfg.Q;
    spec.sigma_y = cfg.sigma_y;
    spec.sigma_d = cfg.sigma_d;
    spec.add_bias = cfg.add_bias;
    spec.seed = mix_seed(cfg.seed, 0x5431 + static_cast<std::uint64_t>(c),
                         static_cast<std::uint64_t>(trial));
    const SampleClusterData data = make_sample_cluster_data(spec);
    const std::uint64_t tseed = mix_seed(spec.seed, 0xead);
    const auto& labels = data.train_groups.labels();

    auto refine = [&](const Dataset& ftr, const Partition& init, double lam, std::uint64_t s) {
      return fit_alternating_sample(ftr, cfg.Q, lam, s, init, cfg.budget.am_max_alternations)
          .model.experts;
    };

    CvEvaluator evaluate = [&](const Dataset& ftr, const std::vector<int>& idx,
                               const Dataset& fval, double lam) {
      const std::uint64_t fseed = mix_seed(tseed, static_cast<std::uint64_t>(method + 1),
                                           index_seed(idx));
      Matrix experts;
      switch (method) {
        case 0: {  // oracle: plain least squares on the true grouping
          std::vector<int> sub(idx.size());
          for (std::size_t i = 0; i < idx.size(); ++i) sub[i] = labels[idx[i]];
          experts = refit_sample_partition(ftr, Partition::from_labels(sub), 0.0).experts;
          break;
        }
        case 1:
          experts = fit_alternating_sample(ftr, cfg.Q, lam, fseed, std::nullopt,
                                           cfg.budget.am_max_alternations)
                        .model.experts;
          break;
        case 2: {
          PGDConfig pc;
          pc.loss = LossKind::Squared;
          pc.hp.Q = cfg.Q;
          pc.hp.lambda = lam;
          pc.hp.epsilon = cfg.budget.epsilon;
          pc.hp.max_iter = cfg.budget.pgd_max_iter;
          pc.hp.rng_seed = fseed;
          pc.kmeans_restarts = cfg.budget.restarts;
          const PGDResult r = pgd_fit_sample_cluster(ftr, pc);
          experts = refine(ftr, r.partition, lam, mix_seed(fseed, 0xa3));
          break;
        }
        default: {
          CGConfig gc;
          gc.Q = cfg.Q;
          gc.lambda = lam;
          gc.epsilon = cfg.budget.cg_epsilon;
          gc.max_iter = cfg.budget.cg_max_iter;
          gc.seed = fseed;
          gc.restarts = cfg.budget.restarts;
          const CGResult r = cg_fit(ftr, true, gc);
          experts = refine(ftr, r.partition, lam, mix_seed(fseed, 0xa3));
          break;
        }
      }
      return metric_best_expert_mse(fval, experts);
    };

    // The oracle has no hyperparameter, so it skips the cross-validation.
    double chosen = 0.0;
    if (method != 0)
      chosen = select_lambda(data.train, cfg.lambda_grid, cfg.folds, mix_seed(tseed, 0xcf),
                             t.methods[method], evaluate)
                   .best_lambda;
    const double score = evaluate(data.train, identity_idx(data.train.n()), data.test, chosen);
    return cfg.sum_over_test ? score * data.test.n() : score;
  });
  return t;
}

// ---------------------------------------------------------------------------
// Clustered-weights benches (dense and sparse truth).
// ---------------------------------------------------------------------------

namespace {

// Ridge restricted to "w = Z v" for indicator columns Z over groups of a
// support; off-support features stay exactly zero.
Vector refit_support_groups(const Dataset& data, const std::vector<std::vector<int>>& groups,
                            double lambda) {
  Matrix Z = Matrix::Zero(data.d(), static_cast<int>(groups.size()));
  for (std::size_t q = 0; q < groups.size(); ++q)
    for (int j : groups[q]) Z(j, static_cast<int>(q)) = 1.0;
  const Matrix XZ = data.X * Z;
  const Matrix H = XZ.transpose() * XZ + (data.n() * lambda) * (Z.transpose() * Z);
  const Vector rhs = XZ.transpose() * data.y;
  Eigen::LLT<Matrix> llt(H);
  Vector v;
  if (lambda > 0 && llt.info() == Eigen::Success)
    v = llt.solve(rhs);
  else
    v = H.completeOrthogonalDecomposition().solve(rhs);
  return Z * v;
}

struct FeatureBenchShared {
  int Q;
  std::optional<int> sparse_k;
  SolverBudget budget;
};

// One weight vector per method; shared by the dense and sparse benches.
Vector fit_feature_method(int method, const Dataset& ftr, const FeatureClusterData& data,
                          double lam, std::uint64_t fseed, const FeatureBenchShared& sh) {
  auto pgd_config = [&](std::uint64_t s) {
    PGDConfig pc;
    pc.loss = LossKind::Squared;
    pc.hp.Q = sh.Q;
    pc.hp.lambda = lam;
    pc.hp.epsilon = sh.budget.epsilon;
    pc.hp.max_iter = sh.budget.pgd_max_iter;
    pc.hp.rng_seed = s;
    pc.kmeans_restarts = sh.budget.restarts;
    return pc;
  };
  auto cg_config = [&](std::uint64_t s) {
    CGConfig gc;
    gc.Q = sh.Q;
    gc.lambda = lam;
    gc.epsilon = sh.budget.cg_epsilon;
    gc.max_iter = sh.budget.cg_max_iter;
    gc.seed = s;
    gc.restarts = sh.budget.restarts;
    return gc;
  };
  const Variant pg_variant =
      sh.sparse_k ? Variant::SparseFeatureCluster : Variant::FeatureCluster;

  switch (method) {
    case 0:  // oracle: refit on the true structure
      if (sh.sparse_k) {
        std::vector<std::vector<int>> groups(sh.Q);
        for (int j : data.support)
          for (int q = 0; q < sh.Q; ++q)
            if (data.w_star[j] == data.values[q]) groups[q].push_back(j);
        return refit_support_groups(ftr, groups, lam);
      }
      return refit_feature_partition(ftr, data.feature_groups, lam).weights().col(0);
    case 1:
      return fit_ls(ftr, lam);
    case 2:
      return fit_lsk(ftr, sh.Q, lam).weight_vector();
    case 3: {
      PGDConfig pc = pgd_config(fseed);
      if (sh.sparse_k) pc.hp.k = sh.sparse_k;
      return pgd_fit(ftr, pg_variant, pc).W.col(0);
    }
    case 4:
      return cg_fit(ftr, false, cg_config(fseed)).feature_model->weights().col(0);
    default: {  // conditional gradient, polished by projected gradient
      const Vector w0 = cg_fit(ftr, false, cg_config(fseed)).feature_model->weights().col(0);
      PGDConfig pc = pgd_config(mix_seed(fseed, 0x9d));
      if (sh.sparse_k) pc.hp.k = sh.sparse_k;
      pc.init = InitKind::Warm;
      pc.warm_start = Matrix(w0);
      return pgd_fit(ftr, pg_variant, pc).W.col(0);
    }
  }
}

TableResult run_feature_bench(const char* name, const std::vector<int>& n_train, int n_test,
                              int d, int Q, std::optional<int> k, double sigma, double min_gap,
                              const std::vector<double>& grid, int folds, std::uint64_t seed,
                              const SolverBudget& budget, int trials, std::uint64_t table_tag) {
  std::vector<std::string> columns;
  for (int n : n_train) columns.push_back("n=" + std::to_string(n));
  TableResult t = init_table(name, {"oracle", "ls", "lsk", "pg", "cg", "cg+pg"},
                             std::move(columns), trials);
  const FeatureBenchShared sh{Q, k, budget};

  fill_cells(t, trials, [&](int method, int c, int trial) {
    FeatureClusterSpec spec;
    spec.n_train = n_train[c];
    spec.n_test = n_test;
    spec.d = d;
    spec.Q = Q;
    spec.k = k;
    spec.sigma = sigma;
    spec.min_gap = min_gap;
    spec.seed = mix_seed(seed, table_tag + static_cast<std::uint64_t>(c),
                         static_cast<std::uint64_t>(trial));
    const FeatureClusterData data = make_feature_cluster_data(spec);
    const std::uint64_t tseed = mix_seed(spec.seed, 0xead);

    auto fit_w = [&](const Dataset& ftr, const std::vector<int>& idx, double lam) {
      const std::uint64_t fseed =
          mix_seed(tseed, static_cast<std::uint64_t>(method + 1), index_seed(idx));
      return fit_feature_method(method, ftr, data, lam, fseed, sh);
    };
    // Lambda is selected by validation prediction error; the reported score
    // is the weight estimation error against the generating vector.
    CvEvaluator evaluate = [&](const Dataset& ftr, const std::vector<int>& idx,
                               const Dataset& fval, double lam) {
      return metric_mse(fval, fit_w(ftr, idx, lam));
    };

    const CvSelection sel = select_lambda(data.train, grid, folds, mix_seed(tseed, 0xcf),
                                          t.methods[method], evaluate);
    const Vector w = fit_w(data.train, identity_idx(data.train.n()), sel.best_lambda);
    return (w - data.w_star).norm();
  });
  return t;
}

}  // namespace

TableResult run_feature_dense_bench(const FeatureDenseBench& cfg) {
  return run_feature_bench("feature-dense", cfg.n_train, cfg.n_test, cfg.d, cfg.Q, std::nullopt,
                           cfg.sigma, cfg.min_gap, cfg.lambda_grid, cfg.folds, cfg.seed,
                           cfg.budget, cfg.trials, 0x5432);
}

TableResult run_feature_sparse_bench(const FeatureSparseBench& cfg) {
  return run_feature_bench("feature-sparse", cfg.n_train, cfg.n_test, cfg.d, cfg.Q, cfg.k,
                           cfg.sigma, cfg.min_gap, cfg.lambda_grid, cfg.folds, cfg.seed,
                           cfg.budget, cfg.trials, 0x5433);
}

}  // namespace clm
