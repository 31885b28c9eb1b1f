#include "tailfuse/optim.hpp"

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <stdexcept>

#include "tailfuse/math.hpp"

namespace tailfuse {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Pair {
  std::vector<double> s, y;
  double rho;  // 1 / (s.y)
};

}  // namespace

OptimResult minimize_lbfgs(const ObjectiveFn& fn, std::vector<double> x0,
                           std::span<const double> lower, std::span<const double> upper,
                           const OptimOptions& opts) {
  const std::size_t dim = x0.size();
  const bool boxed = !lower.empty();
  if (boxed && (lower.size() != dim || upper.size() != dim))
    throw std::invalid_argument("minimize_lbfgs: bound size mismatch");

  auto project = [&](std::vector<double>& x) {
    if (!boxed) return;
    for (std::size_t i = 0; i < dim; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  };

  // sup-norm of x - P(x - g): zero exactly at a box-stationary point
  auto projected_grad_norm = [&](const std::vector<double>& x, const std::vector<double>& g) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double step = x[i] - g[i];
      if (boxed) step = std::clamp(step, lower[i], upper[i]);
      nrm = std::max(nrm, std::abs(step - x[i]));
    }
    return nrm;
  };

  OptimResult res;
  project(x0);
  std::vector<double> x = std::move(x0);
  std::vector<double> g(dim), g_new(dim), x_new(dim), d(dim);
  double f = fn(x, g);
  if (!std::isfinite(f)) throw std::invalid_argument("minimize_lbfgs: infeasible start");

  std::deque<Pair> mem;
  std::vector<double> best_x = x;
  double best_f = f;
  int stall = 0;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    res.iterations = iter + 1;
    const double pg = projected_grad_norm(x, g);
    if (pg < opts.grad_tol) {
      res.converged = true;
      res.grad_norm = pg;
      break;
    }

    // two-loop recursion
    for (std::size_t i = 0; i < dim; ++i) d[i] = -g[i];
    std::vector<double> alpha(mem.size());
    for (std::size_t k = mem.size(); k-- > 0;) {
      alpha[k] = mem[k].rho * dot(mem[k].s, d);
      for (std::size_t i = 0; i < dim; ++i) d[i] -= alpha[k] * mem[k].y[i];
    }
    if (!mem.empty()) {
      const auto& last = mem.back();
      const double scale = 1.0 / (last.rho * dot(last.y, last.y));
      for (std::size_t i = 0; i < dim; ++i) d[i] *= scale;
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double beta = mem[k].rho * dot(mem[k].y, d);
      for (std::size_t i = 0; i < dim; ++i) d[i] += (alpha[k] - beta) * mem[k].s[i];
    }

    if (dot(d, g) >= 0.0) {  // not a descent direction: restart
      mem.clear();
      for (std::size_t i = 0; i < dim; ++i) d[i] = -g[i];
    }
    if (mem.empty()) {
      // no curvature information: cap the raw gradient step at unit length
      double dmax = 0.0;
      for (double v : d) dmax = std::max(dmax, std::abs(v));
      if (dmax > 1.0)
        for (double& v : d) v /= dmax;
    }

    // backtracking with projection; c1 Armijo on the projected displacement
    const double noise_floor = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(f) + 1.0);
    double step = 1.0;
    bool accepted = false;
    double f_new = f;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      for (std::size_t i = 0; i < dim; ++i) x_new[i] = x[i] + step * d[i];
      project(x_new);
      double gx = 0.0;
      for (std::size_t i = 0; i < dim; ++i) gx += g[i] * (x_new[i] - x[i]);
      if (gx >= 0.0) {  // projection removed all descent at this step size
        step *= 0.5;
        continue;
      }
      f_new = fn(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * gx) {
        accepted = true;
        break;
      }
      // model decrease below rounding: trust the quasi-Newton step once
      if (std::isfinite(f_new) && -gx < noise_floor && f_new <= f + noise_floor) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!mem.empty()) {  // retry from a fresh steepest-descent state
        mem.clear();
        continue;
      }
      res.grad_norm = pg;
      break;  // line search exhausted
    }

    Pair pr;
    pr.s.resize(dim);
    pr.y.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      pr.s[i] = x_new[i] - x[i];
      pr.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(pr.s, pr.y);
    if (sy > 1e-13 * std::sqrt(dot(pr.s, pr.s) * dot(pr.y, pr.y))) {
      pr.rho = 1.0 / sy;
      mem.push_back(std::move(pr));
      if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
    }

    const double df = f - f_new;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    if (df <= noise_floor) {
      if (++stall >= 10) {
        res.grad_norm = projected_grad_norm(x, g);
        res.converged = res.grad_norm < opts.grad_tol;
        break;
      }
    } else {
      stall = 0;
    }
  }

  if (!res.converged && res.grad_norm == 0.0) res.grad_norm = projected_grad_norm(x, g);
  if (f <= best_f) {
    res.x = std::move(x);
    res.value = f;
  } else {
    res.x = std::move(best_x);
    res.value = best_f;
  }
  return res;
}

}  // namespace tailfuse
