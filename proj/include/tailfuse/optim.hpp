#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tailfuse {

/// Objective callback: returns f(x) and fills grad (same length as x).
/// Infeasible points must return +inf; the gradient is then ignored.
using ObjectiveFn = std::function<double(std::span<const double>, std::span<double>)>;

struct OptimOptions {
  int max_iter = 500;
  double grad_tol = 1e-8;  // sup-norm of the projected gradient
  int memory = 8;
  int max_line_search = 60;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;  // projected-gradient sup-norm at x
  int iterations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with Armijo backtracking and optional box constraints
/// (empty bounds vectors mean unconstrained). Steps are projected onto the
/// box; near the rounding floor of f a model-decrease acceptance keeps the
/// quasi-Newton step usable so tight gradient tolerances remain reachable.
OptimResult minimize_lbfgs(const ObjectiveFn& fn, std::vector<double> x0,
                           std::span<const double> lower, std::span<const double> upper,
                           const OptimOptions& opts = {});

}  // namespace tailfuse
