#pragma once

// Internal projected-descent engine shared by the projected-gradient solvers
// and iterative hard thresholding. Callers provide the smooth objective, its
// gradient, and a projection onto the feasible set.

#include <chrono>
#include <cmath>
#include <functional>

#include "clm/solver_report.hpp"
#include "clm/types.hpp"

namespace clm::detail {

struct DescentCallbacks {
  std::function<double(const Matrix&)> objective;
  std::function<Matrix(const Matrix&)> gradient;
  // iteration index seeds any randomized projection
  std::function<Matrix(const Matrix&, int)> project;
  std::function<void(const Matrix&)> on_accept;  // optional iterate recorder
};

struct DescentOptions {
  LineSearchParams line_search;
  double epsilon = 1e-8;
  int max_iter = 500;
  // Unit-step mode: fixed alpha0, unconditional accept, no line search.
  bool fixed_step = false;
};

inline Matrix run_projected_descent(Matrix W, const DescentCallbacks& cb,
                                    const DescentOptions& opt, SolverReport& report) {
  const auto t0 = std::chrono::steady_clock::now();
  double value = cb.objective(W);
  if (!std::isfinite(value))
    throw DivergedError("objective is not finite at the initial point", {value});
  report.objective_trace.push_back(value);
  if (cb.on_accept) cb.on_accept(W);

  double alpha = opt.line_search.alpha0;
  report.converged = false;
  report.status = "max-iter";
  for (int t = 0; t < opt.max_iter; ++t) {
    const Matrix grad = cb.gradient(W);
    if (opt.fixed_step) {
      W = cb.project(W - opt.line_search.alpha0 * grad, t);
      const double next = cb.objective(W);
      if (!std::isfinite(next)) throw DivergedError("objective diverged", report.objective_trace);
      report.objective_trace.push_back(next);
      report.step_sizes.push_back(opt.line_search.alpha0);
      report.iterations = t + 1;
      if (cb.on_accept) cb.on_accept(W);
      if (std::abs(next - value) < opt.epsilon) {
        report.converged = true;
        report.status = "converged";
        break;
      }
      value = next;
      continue;
    }

    bool accepted = false;
    while (alpha >= opt.line_search.alpha_min) {
      Matrix cand = cb.project(W - alpha * grad, t);
      const double next = cb.objective(cand);
      if (std::isfinite(next) && next < value) {
        W = std::move(cand);
        report.objective_trace.push_back(next);
        report.step_sizes.push_back(alpha);
        report.iterations = t + 1;
        if (cb.on_accept) cb.on_accept(W);
        const bool small_change = std::abs(next - value) < opt.epsilon;
        value = next;
        alpha *= opt.line_search.grow;
        accepted = true;
        if (small_change) {
          report.converged = true;
          report.status = "converged";
        }
        break;
      }
      alpha *= opt.line_search.shrink;
    }
    if (!accepted) {
      // No decrease at any admissible step size: stationary for this scheme.
      report.converged = true;
      report.status = "stationary";
      break;
    }
    if (report.converged) break;
  }
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return W;
}

}  // namespace clm::detail
