#pragma once

#include <string>
#include <vector>

namespace clm {

// Backtracking line search: a step is accepted only on strict decrease, the
// step size grows by `grow` after an accept and shrinks by `shrink` on a
// reject; once it falls below `alpha_min` the iterate is declared stationary.
struct LineSearchParams {
  double alpha0 = 1.0;
  double grow = 2.0;
  double shrink = 0.5;
  double alpha_min = 1e-10;
};

struct SolverReport {
  std::vector<double> objective_trace;  // value at init, then every accepted iterate
  std::vector<double> step_sizes;       // accepted step sizes
  std::vector<double> fw_gaps;          // conditional-gradient duality gaps
  int iterations = 0;                   // accepted steps
  bool converged = false;
  std::string status;  // "converged" | "stationary" | "max-iter"
  double wall_time_sec = 0.0;
};

}  // namespace clm
