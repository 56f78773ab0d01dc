#pragma once

#include <cstdint>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace clm {

// OpenMP loop helpers. Every parallel loop in this codebase writes to
// per-index slots and reduces serially afterwards, so results are identical
// for any thread count (including 1).

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// An exception escaping an OpenMP region would terminate the process, so the
// first one thrown is captured and rethrown after the loop joins.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
#ifdef _OPENMP
  std::exception_ptr error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
#else
  for (std::int64_t i = 0; i < n; ++i) body(i);
#endif
}

// Serial twin of parallel_for, kept so tests and benchmarks can compare the
// two paths on the same body.
template <class F>
void serial_for(std::int64_t n, F&& body) {
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace clm
