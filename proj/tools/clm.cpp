#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "clm/baselines.hpp"
#include "clm/cg.hpp"
#include "clm/csv.hpp"
#include "clm/experiments.hpp"
#include "clm/json_io.hpp"
#include "clm/pgd.hpp"
#include "clm/projections.hpp"
#include "clm/rng.hpp"
#include "clm/synthetic.hpp"
#include "clm/theory.hpp"

namespace {

using namespace clm;

std::uint64_t env_seed() {
  if (const char* s = std::getenv("CLM_SEED")) return std::strtoull(s, nullptr, 10);
  return 0;
}

void emit(const Json& j, const std::string& out_path) {
  const std::string text = dump_json(j);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot write " + out_path);
    out << text;
  }
}

enum class VariantOpt { Feature, Sample, Sparse, Multitask, FeatureClass, SampleClass };

VariantOpt parse_variant(const std::string& s) {
  if (s == "feature") return VariantOpt::Feature;
  if (s == "sample") return VariantOpt::Sample;
  if (s == "sparse") return VariantOpt::Sparse;
  if (s == "multitask") return VariantOpt::Multitask;
  if (s == "feature-class") return VariantOpt::FeatureClass;
  if (s == "sample-class") return VariantOpt::SampleClass;
  throw InputError("unknown variant: " + s);
}

bool class_variant(VariantOpt v) {
  return v == VariantOpt::FeatureClass || v == VariantOpt::SampleClass;
}
bool sample_variant(VariantOpt v) {
  return v == VariantOpt::Sample || v == VariantOpt::SampleClass;
}

LossKind default_loss(VariantOpt v) {
  switch (v) {
    case VariantOpt::FeatureClass:
    case VariantOpt::SampleClass:
    case VariantOpt::Multitask:
      return LossKind::MulticlassSquared;
    default:
      return LossKind::Squared;
  }
}

LossKind parse_loss(const std::string& s) {
  if (s == "squared") return LossKind::Squared;
  if (s == "logistic") return LossKind::Logistic;
  if (s == "multiclass-squared") return LossKind::MulticlassSquared;
  if (s == "multiclass-logistic") return LossKind::MulticlassLogistic;
  throw InputError("unknown loss: " + s);
}

// Options shared by fit and cv.
struct FitOptions {
  std::string train, test, target = "y";
  std::vector<std::string> targets;  // multitask
  std::string solver = "pgd";
  std::string variant = "feature";
  std::string loss;  // empty = per-variant default
  std::string init = "default";
  std::string refine = "none";
  int Q = 1;
  std::optional<int> k;
  double lambda = 0.0;
  double lambda_M = 0.0, lambda_B = 0.0, lambda_W = 0.0;
  double epsilon = 1e-8;
  int max_iter = 500;
  int restarts = 5;
  int cg_max_iter = 200;
  std::uint64_t seed = 0;
  bool intercept = false;
  bool timings = false;
};

Dataset load_for_variant(const FitOptions& o) {
  const VariantOpt v = parse_variant(o.variant);
  if (v == VariantOpt::Multitask) {
    if (o.targets.empty()) throw InputError("multitask needs --targets");
    return load_multitask_csv(o.train, o.targets);
  }
  if (class_variant(v)) return load_classification_csv(o.train, o.target);
  return load_regression_csv(o.train, o.target);
}

Dataset load_test_like(const FitOptions& o) {
  FitOptions t = o;
  t.train = o.test;
  return load_for_variant(t);
}

Hyperparams hyperparams_of(const FitOptions& o) {
  Hyperparams hp;
  hp.Q = o.Q;
  hp.k = o.k;
  hp.lambda = o.lambda;
  hp.lambda_M = o.lambda_M;
  hp.lambda_B = o.lambda_B;
  hp.lambda_W = o.lambda_W;
  hp.epsilon = o.epsilon;
  hp.max_iter = o.max_iter;
  hp.rng_seed = o.seed;
  hp.fit_intercept = o.intercept;
  hp.validate();
  return hp;
}

PGDConfig pgd_config_of(const FitOptions& o) {
  PGDConfig cfg;
  cfg.loss = o.loss.empty() ? default_loss(parse_variant(o.variant)) : parse_loss(o.loss);
  cfg.hp = hyperparams_of(o);
  cfg.kmeans_restarts = o.restarts;
  if (o.init == "default")
    cfg.init = InitKind::Default;
  else if (o.init == "zeros")
    cfg.init = InitKind::Zeros;
  else if (o.init == "lsk")
    cfg.init = InitKind::LeastSquaresKMeans;
  else
    throw InputError("unknown init: " + o.init);
  return cfg;
}

Variant pgd_variant_of(VariantOpt v) {
  switch (v) {
    case VariantOpt::Feature:
      return Variant::FeatureCluster;
    case VariantOpt::Sparse:
      return Variant::SparseFeatureCluster;
    case VariantOpt::FeatureClass:
      return Variant::FeatureClusterMulticlass;
    case VariantOpt::Sample:
    case VariantOpt::SampleClass:
      return Variant::SampleCluster;
    case VariantOpt::Multitask:
      return Variant::Multitask;
  }
  throw InputError("unknown variant");
}

Json test_metrics(const Dataset& test, VariantOpt v, const Matrix& W, double intercept,
                  const Matrix* experts) {
  Json m;
  if (sample_variant(v)) {
    if (test.task == TaskKind::Regression && experts)
      m["best_expert_mse"] = metric_best_expert_mse(test, *experts);
    return m;
  }
  if (test.task == TaskKind::Regression) {
    m["mse"] = metric_mse(test, W.col(0), intercept);
  } else {
    m["mse"] = metric_mse_multi(test, W);
    if (test.task == TaskKind::Classification) m["accuracy"] = metric_accuracy(test, W);
  }
  return m;
}

// Fits one (solver, variant) pair and returns the output JSON plus, for
// validation scoring, the fitted predictor.
struct FitOutcome {
  Json output;
  Matrix W;            // feature-space predictor (empty for sample kinds)
  double intercept = 0.0;
  Matrix experts;      // sample kinds
};

FitOutcome run_fit(const Dataset& data, const FitOptions& o, double lambda,
                   std::uint64_t seed) {
  const VariantOpt v = parse_variant(o.variant);
  FitOptions local = o;
  local.lambda = lambda;
  local.seed = seed;
  FitOutcome out;

  if (o.solver == "pgd") {
    PGDConfig cfg = pgd_config_of(local);
    const PGDResult res = pgd_fit(data, pgd_variant_of(v), cfg);
    out.output = pgd_result_json(res, o.timings);
    if (sample_variant(v)) {
      out.experts = res.values.transpose();
      out.output["model"] = sample_model_json(res.sample_model(data.num_targets()));
    } else {
      out.W = res.W;
      out.intercept = res.intercept;
    }
    return out;
  }
  if (o.solver == "cg") {
    if (v == VariantOpt::Sparse || v == VariantOpt::Multitask)
      throw InputError("the relaxation handles dense feature or sample clustering");
    CGConfig cfg;
    cfg.Q = o.Q;
    cfg.lambda = lambda;
    cfg.max_iter = o.cg_max_iter;
    cfg.seed = seed;
    cfg.restarts = o.restarts;
    CGResult res = cg_fit(data, sample_variant(v), cfg);
    out.output = cg_result_json(res, o.timings);
    if (o.refine == "pgd" && !sample_variant(v)) {
      FitOptions ro = local;
      ro.solver = "pgd";
      PGDConfig cfg2 = pgd_config_of(ro);
      cfg2.init = InitKind::Warm;
      cfg2.warm_start = res.feature_model->weights();
      const PGDResult res2 = pgd_fit(data, pgd_variant_of(v), cfg2);
      out.output["refined"] = pgd_result_json(res2, o.timings);
      out.W = res2.W;
      return out;
    }
    if (o.refine == "am" && sample_variant(v) && data.task == TaskKind::Regression) {
      const AlternatingResult res2 =
          fit_alternating_sample(data, o.Q, lambda, mix_seed(seed, 0xa3), res.partition);
      out.output["refined"] = sample_model_json(res2.model);
      out.experts = res2.model.experts;
      return out;
    }
    if (sample_variant(v))
      out.experts = res.sample_model->experts;
    else
      out.W = res.feature_model->weights();
    return out;
  }
  if (o.solver == "ls") {
    const Vector w = fit_ls(data, lambda);
    out.W = w;
    out.output = Json{{"solver", "ls"}, {"weights", vector_json(w)}};
    return out;
  }
  if (o.solver == "lsk") {
    const ClusteredLinearModel m = fit_lsk(data, o.Q, lambda);
    out.W = m.weights();
    out.output = Json{{"solver", "lsk"}, {"model", feature_model_json(m)}};
    return out;
  }
  if (o.solver == "am") {
    if (!sample_variant(v)) throw InputError("alternating minimization clusters samples");
    const AlternatingResult res = fit_alternating_sample(data, o.Q, lambda, seed);
    out.experts = res.model.experts;
    out.output = Json{{"solver", "am"},
                      {"model", sample_model_json(res.model)},
                      {"alternations", res.alternations},
                      {"converged", res.converged},
                      {"objective_trace", res.objective_trace}};
    return out;
  }
  if (o.solver == "iht") {
    if (!o.k) throw InputError("iht needs --k");
    const IHTResult res = fit_iht(data, *o.k, lambda, {}, o.epsilon, o.max_iter);
    out.W = res.w;
    out.output = Json{{"solver", "iht"},
                      {"weights", vector_json(res.w)},
                      {"report", report_json(res.report, o.timings)}};
    return out;
  }
  throw InputError("unknown solver: " + o.solver);
}

int cmd_fit(const FitOptions& o, const std::string& out_path) {
  const Dataset data = load_for_variant(o);
  FitOutcome res = run_fit(data, o, o.lambda, o.seed);
  res.output["variant"] = o.variant;
  if (!o.test.empty()) {
    const Dataset test = load_test_like(o);
    const Matrix* experts = res.experts.size() > 0 ? &res.experts : nullptr;
    res.output["test_metrics"] =
        test_metrics(test, parse_variant(o.variant), res.W, res.intercept, experts);
  }
  emit(res.output, out_path);
  return 0;
}

int cmd_cv(const FitOptions& o, const std::vector<double>& grid, int folds,
           const std::string& out_path) {
  const Dataset data = load_for_variant(o);
  const VariantOpt v = parse_variant(o.variant);
  CvEvaluator evaluate = [&](const Dataset& ftr, const std::vector<int>& idx,
                             const Dataset& fval, double lam) {
    const FitOutcome r = run_fit(ftr, o, lam, mix_seed(o.seed, idx.size(), idx.front()));
    if (sample_variant(v)) return metric_best_expert_mse(fval, r.experts);
    if (fval.task == TaskKind::Regression) return metric_mse(fval, r.W.col(0), r.intercept);
    return metric_mse_multi(fval, r.W);
  };
  const CvSelection sel = select_lambda(data, grid, folds, o.seed, o.solver, evaluate);
  emit(Json{{"best_lambda", sel.best_lambda},
            {"lambda_grid", grid},
            {"mean_scores", sel.mean_scores}},
       out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clustered linear models: solvers, relaxation, and experiment harness"};
  app.require_subcommand(1);
  std::string out_path;
  app.add_option("--out", out_path, "write JSON output to this file instead of stdout");
  int threads = 0;
  app.add_option("--threads", threads, "cap the OpenMP thread count");

  // generate ----------------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "write a synthetic train/test pair as CSV");
  std::string gen_kind = "sample";
  std::string gen_train = "train.csv", gen_test = "test.csv", gen_truth;
  SampleClusterSpec gspec;
  FeatureClusterSpec fspec;
  double gen_noise_fraction = -1.0;
  int gen_k = 0;
  gspec.seed = fspec.seed = env_seed();
  gen->add_option("--kind", gen_kind, "sample | feature")
      ->check(CLI::IsMember({"sample", "feature"}));
  gen->add_option("--out-train", gen_train, "training CSV path");
  gen->add_option("--out-test", gen_test, "test CSV path");
  gen->add_option("--truth", gen_truth, "also write the ground truth as JSON");
  gen->add_option("--n-train", gspec.n_train, "training samples");
  gen->add_option("--n-test", gspec.n_test, "test samples");
  gen->add_option("--d", gspec.d, "informative features");
  gen->add_option("--d-noise", gspec.d_noise, "noise features (sample kind)");
  gen->add_option("--noise-fraction", gen_noise_fraction,
                  "derive --d-noise from a fraction of all columns");
  gen->add_option("--q", gspec.Q, "number of groups");
  gen->add_option("--sigma-y", gspec.sigma_y, "label noise (sample kind)");
  gen->add_option("--sigma-d", gspec.sigma_d, "feature scale (sample kind)");
  gen->add_flag("--no-bias", "omit the constant column (sample kind)");
  gen->add_option("--sigma", fspec.sigma, "label noise (feature kind)");
  gen->add_option("--min-gap", fspec.min_gap, "minimum value separation (feature kind)");
  gen->add_option("--k", gen_k, "sparse support size (feature kind)");
  gen->add_option("--seed", gspec.seed, "RNG seed (default: CLM_SEED or 0)");

  // fit / cv ----------------------------------------------------------------
  FitOptions fo;
  fo.seed = env_seed();
  std::vector<double> cv_grid{1e-4, 1e-3, 1e-2, 1e-1};
  int cv_folds = 3;
  auto add_fit_options = [&](CLI::App* c) {
    c->add_option("--train", fo.train, "training CSV")->required();
    c->add_option("--target", fo.target, "target column name");
    c->add_option("--targets", fo.targets, "multitask target column names");
    c->add_option("--solver", fo.solver, "pgd | cg | ls | lsk | am | iht")
        ->check(CLI::IsMember({"pgd", "cg", "ls", "lsk", "am", "iht"}));
    c->add_option("--variant", fo.variant,
                  "feature | sample | sparse | multitask | feature-class | sample-class")
        ->check(CLI::IsMember({"feature", "sample", "sparse", "multitask", "feature-class",
                               "sample-class"}));
    c->add_option("--loss", fo.loss,
                  "squared | logistic | multiclass-squared | multiclass-logistic");
    c->add_option("--q", fo.Q, "group budget");
    c->add_option("--k", [&fo](const std::vector<std::string>& vals) {
      fo.k = std::stoi(vals.front());
      return true;
    }, "sparsity budget");
    c->add_option("--lambda", fo.lambda, "ridge weight");
    c->add_option("--lambda-m", fo.lambda_M, "multitask mean penalty");
    c->add_option("--lambda-b", fo.lambda_B, "multitask between-cluster penalty");
    c->add_option("--lambda-w", fo.lambda_W, "multitask within-cluster penalty");
    c->add_option("--epsilon", fo.epsilon, "stopping threshold");
    c->add_option("--max-iter", fo.max_iter, "iteration cap");
    c->add_option("--cg-max-iter", fo.cg_max_iter, "relaxation iteration cap");
    c->add_option("--restarts", fo.restarts, "k-means restarts");
    c->add_option("--init", fo.init, "default | zeros | lsk")
        ->check(CLI::IsMember({"default", "zeros", "lsk"}));
    c->add_option("--refine", fo.refine, "none | pgd | am")
        ->check(CLI::IsMember({"none", "pgd", "am"}));
    c->add_flag("--intercept", fo.intercept, "fit an unpenalized intercept");
    c->add_flag("--timings", fo.timings, "include wall-clock times in the JSON");
    c->add_option("--seed", fo.seed, "RNG seed (default: CLM_SEED or 0)");
  };
  auto* fit = app.add_subcommand("fit", "fit a model and print it as JSON");
  add_fit_options(fit);
  fit->add_option("--test", fo.test, "score on this CSV after fitting");
  auto* cv = app.add_subcommand("cv", "pick lambda by cross-validation");
  add_fit_options(cv);
  cv->add_option("--lambdas", cv_grid, "lambda grid");
  cv->add_option("--folds", cv_folds, "fold count");

  // project -------------------------------------------------------------------
  auto* proj = app.add_subcommand("project", "project a vector onto the model set");
  std::string proj_input;
  int proj_k = 0, proj_q = 1;
  proj->add_option("--input", proj_input, "vector file, one value per line")->required();
  proj->add_option("--k", proj_k, "sparsity budget (0 = dense clustering only)");
  proj->add_option("--q", proj_q, "group budget")->required();

  // bench ---------------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "run a benchmark table");
  std::string bench_table = "feature-dense", bench_format = "json";
  SampleNoiseBench t1;
  FeatureDenseBench t2;
  FeatureSparseBench t3;
  int bench_trials = 20, bench_folds = 3, bench_ntest = 100;
  std::uint64_t bench_seed = env_seed();
  std::vector<double> bench_lambdas, bench_fracs;
  std::vector<int> bench_ntrain;
  SolverBudget budget;
  bench->add_option("--table", bench_table, "sample-noise | feature-dense | feature-sparse")
      ->check(CLI::IsMember({"sample-noise", "feature-dense", "feature-sparse"}));
  bench->add_option("--format", bench_format, "json | csv | text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  bench->add_option("--trials", bench_trials, "trials per cell");
  bench->add_option("--folds", bench_folds, "cross-validation folds");
  bench->add_option("--seed", bench_seed, "RNG seed (default: CLM_SEED or 0)");
  bench->add_option("--lambdas", bench_lambdas, "lambda grid");
  bench->add_option("--n-train", bench_ntrain, "training sizes (feature tables) or size");
  bench->add_option("--n-test", bench_ntest, "test samples");
  bench->add_option("--noise-fractions", bench_fracs, "noise columns (sample-noise)");
  bench->add_option("--d", t2.d, "feature count");
  bench->add_option("--q", t2.Q, "group budget");
  bench->add_option("--k", t3.k, "sparse support size (feature-sparse)");
  bench->add_option("--sigma", t2.sigma, "label noise (feature tables)");
  bench->add_option("--min-gap", t2.min_gap, "value separation (feature tables)");
  bench->add_option("--pgd-max-iter", budget.pgd_max_iter, "projected-gradient cap");
  bench->add_option("--cg-max-iter", budget.cg_max_iter, "relaxation cap");
  bench->add_option("--restarts", budget.restarts, "k-means restarts");
  bench->add_option("--am-max", budget.am_max_alternations, "alternation cap");

  // theory ----------------------------------------------------------------------
  auto* theory = app.add_subcommand("theory", "constants, bounds, and counting checks");
  std::string th_check = "stirling", th_train, th_target = "y", th_wstar;
  int th_d = 8, th_q = 2, th_k = 4, th_iters = 25, th_subsample = 0;
  double th_sigma = 0.1;
  std::uint64_t th_seed = env_seed();
  bool th_serial = false;
  theory->add_option("--check", th_check, "stirling | sparse-count | constants | convergence")
      ->check(CLI::IsMember({"stirling", "sparse-count", "constants", "convergence"}));
  theory->add_option("--d", th_d, "dimension");
  theory->add_option("--q", th_q, "group budget");
  theory->add_option("--k", th_k, "sparsity budget (sparse-count)");
  theory->add_option("--train", th_train, "CSV providing the design matrix");
  theory->add_option("--target", th_target, "target column of --train");
  theory->add_option("--wstar", th_wstar, "true weight vector file (convergence)");
  theory->add_option("--sigma", th_sigma, "label noise (convergence)");
  theory->add_option("--iterations", th_iters, "gradient steps (convergence)");
  theory->add_option("--subsample", th_subsample, "sampled partitions instead of enumeration");
  theory->add_flag("--serial", th_serial, "use the serial sweep");
  theory->add_option("--seed", th_seed, "RNG seed (default: CLM_SEED or 0)");

  // Let --out/--threads appear after the subcommand name as well as before.
  for (CLI::App* sub : {gen, fit, cv, proj, bench, theory}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (app.got_subcommand(gen)) {
      Json truth;
      if (gen_kind == "sample") {
        if (gspec.add_bias) gspec.add_bias = gen->count("--no-bias") == 0;
        if (gen_noise_fraction >= 0)
          gspec.d_noise = noise_features_for_fraction(
              gen_noise_fraction, gspec.d + (gspec.add_bias ? 1 : 0));
        const SampleClusterData data = make_sample_cluster_data(gspec);
        save_dataset_csv(gen_train, data.train);
        save_dataset_csv(gen_test, data.test);
        truth = Json{{"kind", "sample"},
                     {"experts", matrix_json(data.experts)},
                     {"train_groups", partition_json(data.train_groups)},
                     {"test_groups", partition_json(data.test_groups)}};
      } else {
        fspec.n_train = gspec.n_train;
        fspec.n_test = gspec.n_test;
        fspec.d = gspec.d;
        fspec.Q = gspec.Q;
        fspec.seed = gspec.seed;
        if (gen_k > 0) fspec.k = gen_k;
        const FeatureClusterData data = make_feature_cluster_data(fspec);
        save_dataset_csv(gen_train, data.train);
        save_dataset_csv(gen_test, data.test);
        truth = Json{{"kind", "feature"},
                     {"w_star", vector_json(data.w_star)},
                     {"support", data.support},
                     {"values", vector_json(data.values)},
                     {"feature_groups", partition_json(data.feature_groups)}};
      }
      if (!gen_truth.empty()) {
        std::ofstream out(gen_truth);
        if (!out) throw InputError("cannot write " + gen_truth);
        out << dump_json(truth);
      }
      emit(Json{{"train", gen_train}, {"test", gen_test}}, out_path);
      return 0;
    }
    if (app.got_subcommand(fit)) return cmd_fit(fo, out_path);
    if (app.got_subcommand(cv)) return cmd_cv(fo, cv_grid, cv_folds, out_path);
    if (app.got_subcommand(proj)) {
      const Vector x = load_vector(proj_input);
      if (proj_k > 0) {
        const ProjectionResult r = project_sparse_clustered(x, proj_k, proj_q);
        emit(projection_json(SparseClusteredModel{r.w, r.support, r.support_groups,
                                                  r.barycenters},
                             r.distance2),
             out_path);
      } else {
        const ClusteredProjection r =
            project_clustered(x, proj_q, ClusterProjMode::Exact1d, 0);
        emit(Json{{"w", vector_json(r.W_hat.col(0))},
                  {"groups", partition_json(assignment_to_partition(r.Z))},
                  {"distance2", r.distance2}},
             out_path);
      }
      return 0;
    }
    if (app.got_subcommand(bench)) {
      TableResult table;
      if (bench_table == "sample-noise") {
        t1.trials = bench_trials;
        t1.folds = bench_folds;
        t1.seed = bench_seed;
        t1.n_test = bench_ntest;
        t1.budget = budget;
        if (!bench_ntrain.empty()) t1.n_train = bench_ntrain.front();
        if (!bench_lambdas.empty()) t1.lambda_grid = bench_lambdas;
        if (!bench_fracs.empty()) t1.noise_fractions = bench_fracs;
        table = run_sample_noise_bench(t1);
      } else if (bench_table == "feature-dense") {
        t2.trials = bench_trials;
        t2.folds = bench_folds;
        t2.seed = bench_seed;
        t2.n_test = bench_ntest;
        t2.budget = budget;
        if (!bench_ntrain.empty()) t2.n_train = bench_ntrain;
        if (!bench_lambdas.empty()) t2.lambda_grid = bench_lambdas;
        table = run_feature_dense_bench(t2);
      } else {
        t3.trials = bench_trials;
        t3.folds = bench_folds;
        t3.seed = bench_seed;
        t3.n_test = bench_ntest;
        t3.budget = budget;
        t3.d = t2.d;
        t3.Q = t2.Q;
        t3.sigma = t2.sigma;
        t3.min_gap = t2.min_gap;
        if (!bench_ntrain.empty()) t3.n_train = bench_ntrain;
        if (!bench_lambdas.empty()) t3.lambda_grid = bench_lambdas;
        table = run_feature_sparse_bench(t3);
      }
      if (bench_format == "json") {
        emit(table_json(table), out_path);
      } else {
        const std::string text = bench_format == "csv" ? table_csv(table) : table_text(table);
        if (out_path.empty()) {
          std::cout << text;
        } else {
          std::ofstream out(out_path);
          if (!out) throw InputError("cannot write " + out_path);
          out << text;
        }
      }
      return 0;
    }
    if (app.got_subcommand(theory)) {
      if (th_check == "stirling") {
        emit(stirling_json(stirling_bounds(th_d, th_q)), out_path);
        return 0;
      }
      if (th_check == "sparse-count") {
        const SparseCountBound r = sparse_subspace_count(th_d, th_k, th_q);
        emit(Json{{"count", r.count}, {"bound", r.bound}, {"holds", r.holds}}, out_path);
        return 0;
      }
      if (th_train.empty()) throw InputError("--train is required for this check");
      const Dataset data = load_regression_csv(th_train, th_target);
      ContractionOptions opt;
      opt.subsample = th_subsample;
      opt.seed = th_seed;
      opt.parallel = !th_serial;
      if (th_check == "constants") {
        emit(contraction_json(contraction_constants(data.X, th_q, opt)), out_path);
        return 0;
      }
      if (th_wstar.empty()) throw InputError("--wstar is required for the convergence check");
      const Vector w_star = load_vector(th_wstar);
      emit(convergence_json(
               verify_convergence_bound(data.X, w_star, th_sigma, th_q, th_iters, th_seed, opt)),
           out_path);
      return 0;
    }
    throw InputError("no subcommand selected");
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DivergedError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return 2;
  } catch (const IllConditionedError& e) {
    std::cerr << "ill-conditioned: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
