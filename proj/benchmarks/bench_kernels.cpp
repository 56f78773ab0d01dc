// Compares the OpenMP-parallel kernels against their serial reference twins
// on representative sizes. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "clm/clustering.hpp"
#include "clm/parallel.hpp"
#include "clm/rng.hpp"
#include "clm/theory.hpp"
#include "clm/types.hpp"

namespace {

clm::Matrix gaussian(int r, int c, std::uint64_t seed) {
  auto rng = clm::make_rng(seed);
  std::normal_distribution<double> g;
  clm::Matrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

void bm_assign_nearest_serial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const clm::Matrix points = gaussian(n, 16, 1);
  const clm::Matrix centroids = gaussian(8, 16, 2);
  std::vector<int> labels;
  clm::Vector sqdist;
  for (auto _ : state) {
    clm::detail::assign_nearest_serial(points, centroids, labels, sqdist);
    benchmark::DoNotOptimize(labels.data());
  }
}
BENCHMARK(bm_assign_nearest_serial)->Arg(1 << 12)->Arg(1 << 15);

void bm_assign_nearest_parallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const clm::Matrix points = gaussian(n, 16, 1);
  const clm::Matrix centroids = gaussian(8, 16, 2);
  std::vector<int> labels;
  clm::Vector sqdist;
  for (auto _ : state) {
    clm::detail::assign_nearest_parallel(points, centroids, labels, sqdist);
    benchmark::DoNotOptimize(labels.data());
  }
}
BENCHMARK(bm_assign_nearest_parallel)->Arg(1 << 12)->Arg(1 << 15);

void bm_contraction(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const clm::Matrix X = gaussian(256, 8, 3);
  clm::ContractionOptions opt;
  opt.parallel = parallel;
  for (auto _ : state) {
    const clm::ContractionReport r = clm::contraction_constants(X, 2, opt);
    benchmark::DoNotOptimize(r.rho);
  }
}
BENCHMARK(bm_contraction)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void bm_loop_serial(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto _ : state) {
    clm::serial_for(n, [&](std::int64_t i) {
      out[static_cast<std::size_t>(i)] = static_cast<double>(i) * 1.0000001;
    });
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bm_loop_serial)->Arg(1 << 16);

void bm_loop_parallel(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto _ : state) {
    clm::parallel_for(n, [&](std::int64_t i) {
      out[static_cast<std::size_t>(i)] = static_cast<double>(i) * 1.0000001;
    });
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bm_loop_parallel)->Arg(1 << 16);

}  // namespace

BENCHMARK_MAIN();
