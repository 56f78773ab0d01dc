#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "clm/csv.hpp"
#include "clm/experiments.hpp"
#include "clm/json_io.hpp"
#include "clm/rng.hpp"
#include "clm/synthetic.hpp"

using namespace clm;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("clm_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("prediction metrics on hand-checked values") {
  Matrix X(2, 2);
  X << 1, 0, 0, 1;
  Vector y(2);
  y << 3.0, -1.0;
  const Dataset test = Dataset::regression(X, y);

  Vector w(2);
  w << 1.0, 1.0;
  // residuals: 3-1=2 and -1-1=-2 -> (4+4)/(2*2) = 2
  CHECK(metric_mse(test, w) == doctest::Approx(2.0));
  CHECK(metric_mse(test, w, 1.0) == doctest::Approx((1.0 + 9.0) / 4.0));

  Matrix experts(2, 2);
  experts << 3.0, 1.0, 0.0, -1.0;  // expert 0 = (3,0), expert 1 = (1,-1)
  // sample 0 picks expert 0 exactly; sample 1 picks expert 1 (residual 0).
  CHECK(metric_best_expert_mse(test, experts) == doctest::Approx(0.0));
  experts(0, 0) = 2.0;  // best for sample 0 now off by 1
  CHECK(metric_best_expert_mse(test, experts) == doctest::Approx(0.25));
}

TEST_CASE("accuracy compares argmax rows") {
  Matrix X(3, 2);
  X << 1, 0, 0, 1, 1, 1;
  const Dataset test = Dataset::classification_from_labels(X, {0, 1, 1}, 2);
  Matrix W(2, 2);
  W << 5, 0, 0, 5;  // predicts class 0 for sample 0, class 1 for sample 1, tie for 2
  const double acc = metric_accuracy(test, W);
  CHECK(acc >= 2.0 / 3.0 - 1e-12);
}

TEST_CASE("folds partition the index range evenly") {
  const auto folds = make_folds(11, 3, 5);
  REQUIRE(folds.size() == 3);
  std::set<int> seen;
  for (const auto& f : folds) {
    CHECK(std::is_sorted(f.val_idx.begin(), f.val_idx.end()));
    CHECK(std::is_sorted(f.train_idx.begin(), f.train_idx.end()));
    CHECK(f.train_idx.size() + f.val_idx.size() == 11);
    for (int i : f.val_idx) {
      CHECK_FALSE(seen.count(i));
      seen.insert(i);
    }
    for (int i : f.train_idx) CHECK_FALSE(std::count(f.val_idx.begin(), f.val_idx.end(), i));
    CHECK(f.val_idx.size() >= 3);
    CHECK(f.val_idx.size() <= 4);
  }
  CHECK(seen.size() == 11);

  CHECK(make_folds(11, 3, 5)[0].val_idx == folds[0].val_idx);  // same seed
  CHECK(make_folds(11, 3, 6)[0].val_idx != folds[0].val_idx);  // different shuffle
  CHECK_THROWS_AS(make_folds(3, 4, 0), InputError);
  CHECK_THROWS_AS(make_folds(5, 1, 0), InputError);
}

TEST_CASE("row subsetting keeps task structure") {
  Matrix X(4, 2);
  X << 1, 2, 3, 4, 5, 6, 7, 8;
  Vector y(4);
  y << 10, 20, 30, 40;
  const Dataset sub = subset_rows(Dataset::regression(X, y), {1, 3});
  CHECK(sub.n() == 2);
  CHECK(sub.X(0, 0) == 3);
  CHECK(sub.X(1, 1) == 8);
  CHECK(sub.y[1] == 40);

  const Dataset cls = Dataset::classification_from_labels(X, {0, 1, 0, 1}, 2);
  const Dataset csub = subset_rows(cls, {0, 3});
  CHECK(csub.task == TaskKind::Classification);
  CHECK(csub.Y(0, 0) == 1.0);
  CHECK(csub.Y(1, 1) == 1.0);
}

TEST_CASE("lambda selection prefers the best mean and reports failures") {
  auto rng = make_rng(7);
  std::normal_distribution<double> g;
  Matrix X(24, 3);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 24; ++i) X(i, j) = g(rng);
  Vector w(3);
  w << 1, -2, 3;
  const Dataset data = Dataset::regression(X, X * w);

  SUBCASE("clean quadratic prefers light regularization") {
    // Noiseless data: heavy shrinkage can only hurt.
    CvEvaluator ev = [&](const Dataset& ftr, const std::vector<int>&, const Dataset& fval,
                         double lam) {
      const auto n = static_cast<double>(ftr.n());
      const Matrix H = ftr.X.transpose() * ftr.X +
                       n * lam * Matrix::Identity(ftr.d(), ftr.d());
      const Vector wfit = H.llt().solve(ftr.X.transpose() * ftr.y);
      return metric_mse(fval, wfit);
    };
    const CvSelection sel = select_lambda(data, {1e-6, 1e2}, 3, 0, "ridge", ev);
    CHECK(sel.best_lambda == 1e-6);
    CHECK(sel.mean_scores.size() == 2);
    CHECK(sel.mean_scores[0] < sel.mean_scores[1]);
  }

  SUBCASE("a lambda whose folds all fail is disqualified") {
    CvEvaluator ev = [&](const Dataset&, const std::vector<int>&, const Dataset&,
                         double lam) -> double {
      if (lam < 1.0) throw IllConditionedError("synthetic failure", 1e18);
      return lam;  // larger lambda scores worse but succeeds
    };
    const CvSelection sel = select_lambda(data, {1e-6, 2.0, 3.0}, 3, 0, "m", ev);
    CHECK(sel.best_lambda == 2.0);
    CHECK(std::isnan(sel.mean_scores[0]));
  }

  SUBCASE("every lambda failing raises") {
    CvEvaluator ev = [&](const Dataset&, const std::vector<int>&, const Dataset&,
                         double) -> double {
      throw DivergedError("synthetic", {});
    };
    CHECK_THROWS_AS(select_lambda(data, {1.0, 2.0}, 3, 0, "pg", ev), CvFailedError);
  }
}

TEST_CASE("csv round trips preserve every bit") {
  TempDir tmp;
  SampleClusterSpec spec;
  spec.n_train = 17;
  spec.n_test = 5;
  spec.d = 3;
  spec.d_noise = 2;
  spec.Q = 2;
  spec.seed = 3;
  const Dataset data = make_sample_cluster_data(spec).train;

  const std::string path = tmp.file("train.csv");
  save_dataset_csv(path, data);
  const Dataset back = load_regression_csv(path, "y");
  CHECK(back.n() == data.n());
  CHECK(back.d() == data.d());
  CHECK((back.X - data.X).norm() == 0.0);
  CHECK((back.y - data.y).norm() == 0.0);
}

TEST_CASE("classification and multitask csv round trips") {
  TempDir tmp;
  Matrix X(4, 2);
  X << 0.5, -1.25, 3.0, 0.125, -2.5, 1.0, 0.0, 7.0;

  const Dataset cls = Dataset::classification_from_labels(X, {1, 0, 2, 1}, 3);
  const std::string cpath = tmp.file("cls.csv");
  save_dataset_csv(cpath, cls);
  const Dataset cback = load_classification_csv(cpath, "y");
  CHECK(cback.task == TaskKind::Classification);
  CHECK(cback.num_targets() == 3);
  CHECK((cback.Y - cls.Y).norm() == 0.0);
  CHECK((cback.X - cls.X).norm() == 0.0);

  Matrix Y(4, 2);
  Y << 1, 2, 3, 4, 5, 6, 7, 8;
  const Dataset multi = Dataset::multitask(X, Y);
  const std::string mpath = tmp.file("multi.csv");
  save_dataset_csv(mpath, multi);
  const Dataset mback = load_multitask_csv(mpath, {"t0", "t1"});
  CHECK(mback.task == TaskKind::Multitask);
  CHECK((mback.Y - Y).norm() == 0.0);
  CHECK((mback.X - X).norm() == 0.0);
}

TEST_CASE("csv loader reports bad input precisely") {
  TempDir tmp;
  const std::string path = tmp.file("bad.csv");
  {
    std::ofstream out(path);
    out << "x0,y\n1.0,2.0\noops,3.0\n";
  }
  CHECK_THROWS_WITH_AS(load_regression_csv(path, "y"),
                       doctest::Contains("line 3"), InputError);
  CHECK_THROWS_AS(load_regression_csv(path, "missing"), InputError);
  CHECK_THROWS_AS(load_regression_csv(tmp.file("absent.csv"), "y"), InputError);
}

TEST_CASE("vector files round trip") {
  TempDir tmp;
  Vector v(4);
  v << 1.5, -2.25, 1e-17, 3.0;
  const std::string path = tmp.file("v.txt");
  save_vector(path, v);
  CHECK((load_vector(path) - v).norm() == 0.0);
}

TEST_CASE("sample-noise bench is reproducible and fully populated") {
  SampleNoiseBench cfg;
  cfg.trials = 2;
  cfg.n_train = 48;
  cfg.n_test = 16;
  cfg.d = 3;
  cfg.Q = 2;
  cfg.noise_fractions = {0.0};
  cfg.lambda_grid = {1e-3};
  cfg.folds = 2;
  cfg.seed = 12;
  cfg.budget.pgd_max_iter = 40;
  cfg.budget.cg_max_iter = 15;
  cfg.budget.am_max_alternations = 25;

  const TableResult t = run_sample_noise_bench(cfg);
  CHECK(t.methods == std::vector<std::string>{"oracle", "am", "pg", "cg"});
  REQUIRE(t.cells.size() == 4);
  for (const auto& row : t.cells) {
    REQUIRE(row.size() == 1);
    CHECK(row[0].failures == 0);
    CHECK(std::isfinite(row[0].mean));
    CHECK(row[0].values.size() == 2);
  }
  const TableResult t2 = run_sample_noise_bench(cfg);
  CHECK(table_csv(t) == table_csv(t2));
}

TEST_CASE("feature bench reports weight recovery for every method") {
  FeatureDenseBench cfg;
  cfg.trials = 2;
  cfg.n_train = {40};
  cfg.n_test = 10;
  cfg.d = 12;
  cfg.Q = 2;
  cfg.lambda_grid = {1e-3, 1e-1};
  cfg.folds = 2;
  cfg.seed = 9;
  cfg.budget.pgd_max_iter = 60;
  cfg.budget.cg_max_iter = 15;

  const TableResult t = run_feature_dense_bench(cfg);
  CHECK(t.columns == std::vector<std::string>{"n=40"});
  REQUIRE(t.cells.size() == 6);
  for (const auto& row : t.cells) {
    CHECK(row[0].failures == 0);
    CHECK(std::isfinite(row[0].mean));
    CHECK(row[0].mean >= 0.0);
  }
  const std::string text = table_text(t);
  CHECK(text.find("oracle") != std::string::npos);
  CHECK(text.find("cg+pg") != std::string::npos);
  const std::string csv = table_csv(t);
  CHECK(csv.find("n=40 mean") != std::string::npos);
}

TEST_CASE("json output is key-sorted and newline-terminated") {
  Json j;
  j["zeta"] = 1;
  j["alpha"] = 2;
  const std::string s = dump_json(j);
  CHECK(s == "{\n  \"alpha\": 2,\n  \"zeta\": 1\n}\n");

  SolverReport r;
  r.objective_trace = {2.0, 1.0};
  r.iterations = 1;
  r.converged = true;
  r.status = "converged";
  r.wall_time_sec = 1.25;
  const Json jr = report_json(r);
  CHECK_FALSE(jr.contains("wall_time_sec"));
  CHECK(report_json(r, true).contains("wall_time_sec"));
}
