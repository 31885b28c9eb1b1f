#include "tailfuse/admm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "tailfuse/math.hpp"

namespace tailfuse {

double soft_threshold(double z, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("soft_threshold: threshold must be >= 0");
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// negative log-likelihood + s'(Dg - u) + rho/2 ||Dg - u||^2 over
// x = (gamma_1..gamma_J, theta_1..theta_J), with analytic gradient
struct SmoothSubproblem {
  const ExceedanceData& data;
  const ClusterGraph& g;
  const std::vector<double>& u;
  const std::vector<double>& s;
  double rho;

  double operator()(std::span<const double> x, std::span<double> grad) const {
    const std::size_t J = data.num_clusters();
    double f = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double gamma = x[j];
      const double sigma = std::exp(x[J + j]);
      double dg = 0.0, dt = 0.0;
      for (double y : data.clusters[j].exceedances) {
        const GpdValueGrad v = log_density_value_grad(y, gamma, sigma);
        if (v.log_density == -kInf) return kInf;
        f -= v.log_density;
        dg -= v.d_gamma;
        dt -= v.d_sigma * sigma;
      }
      grad[j] = dg;
      grad[J + j] = dt;
    }
    for (std::size_t m = 0; m < g.edges.size(); ++m) {
      const auto [a, b] = g.edges[m];
      const double r = (x[a] - x[b]) - u[m];
      f += s[m] * r + 0.5 * rho * r * r;
      const double pull = s[m] + rho * r;
      grad[a] += pull;
      grad[b] -= pull;
    }
    return f;
  }
};

}  // namespace

FusedFit admm_fit(const ExceedanceData& data, const ClusterGraph& g, double lambda,
                  std::span<const GpdParams> init, const AdmmOptions& opts) {
  const std::size_t J = data.num_clusters();
  const std::size_t M = g.edges.size();
  if (static_cast<int>(J) != g.num_vertices)
    throw std::invalid_argument("admm_fit: graph size does not match the data");
  if (init.size() != J) throw std::invalid_argument("admm_fit: one initial pair per cluster");
  if (!(lambda >= 0.0)) throw std::invalid_argument("admm_fit: lambda must be >= 0");

  std::vector<double> x(2 * J);
  for (std::size_t j = 0; j < J; ++j) {
    if (!init[j].valid()) throw std::invalid_argument("admm_fit: infeasible initial parameters");
    x[j] = std::clamp(init[j].gamma, opts.fit.gamma_lo, opts.fit.gamma_hi);
    x[J + j] = std::log(init[j].sigma);
  }
  std::vector<double> lower(2 * J, -kInf), upper(2 * J, kInf);
  for (std::size_t j = 0; j < J; ++j) {
    lower[j] = opts.fit.gamma_lo;
    upper[j] = opts.fit.gamma_hi;
  }

  auto gamma_of = [&](const std::vector<double>& v) {
    return std::span<const double>(v.data(), J);
  };

  std::vector<double> u = apply_incidence(g, gamma_of(x));
  std::vector<double> s(M, 0.0);
  if (!opts.warm_dual.empty()) {
    if (opts.warm_dual.size() != M)
      throw std::invalid_argument("admm_fit: warm dual has the wrong length");
    s = opts.warm_dual;
    // keep the start dual-feasible: |s_m| <= lambda * v_m
    for (std::size_t m = 0; m < M; ++m)
      s[m] = std::clamp(s[m], -lambda * g.weights[m], lambda * g.weights[m]);
  }
  std::vector<double> u_prev(M), diff(J), scaled(M);
  double rho = opts.warm_rho > 0.0 ? opts.warm_rho : opts.rho_init;

  OptimOptions inner;
  inner.max_iter = opts.inner_max_iter;
  inner.grad_tol = opts.inner_grad_tol;

  auto run_inner = [&] {
    SmoothSubproblem sub{data, g, u, s, rho};
    OptimResult r = minimize_lbfgs(
        [&sub](std::span<const double> xx, std::span<double> gg) { return sub(xx, gg); }, x, lower,
        upper, inner);
    x = std::move(r.x);
  };

  auto u_and_dual_update = [&](const std::vector<double>& Dg) {
    u_prev = u;
    for (std::size_t m = 0; m < M; ++m)
      u[m] = soft_threshold(Dg[m] + s[m] / rho, lambda * g.weights[m] / rho);
    for (std::size_t m = 0; m < M; ++m) s[m] += rho * (Dg[m] - u[m]);
  };

  bool converged = false;
  int iterations = 0;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    iterations = iter;
    const std::vector<double> gamma_old(x.begin(), x.begin() + J);

    if (opts.conventional_order) {
      run_inner();
      u_and_dual_update(apply_incidence(g, gamma_of(x)));
    } else {
      u_and_dual_update(apply_incidence(g, gamma_old));
      run_inner();
    }

    const std::vector<double> Dg_new = apply_incidence(g, gamma_of(x));
    std::vector<double> primal(M);
    for (std::size_t m = 0; m < M; ++m) primal[m] = Dg_new[m] - u[m];
    for (std::size_t m = 0; m < M; ++m) scaled[m] = rho * (u[m] - u_prev[m]);
    const std::vector<double> dual = apply_incidence_transpose(g, scaled);

    const double eps_pri = opts.eps_abs * std::sqrt(static_cast<double>(M)) +
                           opts.eps_rel * std::max(norm2(Dg_new), norm2(u));
    const double eps_dual = opts.eps_abs * std::sqrt(static_cast<double>(J)) +
                            opts.eps_rel * norm2(apply_incidence_transpose(g, s));
    static const bool trace = std::getenv("TAILFUSE_ADMM_TRACE") != nullptr;
    if (trace && (iter < 20 || iter % 50 == 0))
      std::fprintf(stderr, "admm iter=%d rho=%.3g primal=%.3g/%.3g dual=%.3g/%.3g\n", iter, rho,
                   norm2(primal), eps_pri, norm2(dual), eps_dual);
    if (norm2(primal) <= eps_pri && norm2(dual) <= eps_dual) {
      converged = true;
      break;
    }

    if (iter < opts.rho_freeze_iter) {
      for (std::size_t j = 0; j < J; ++j) diff[j] = x[j] - gamma_old[j];
      std::vector<double> step = apply_incidence(g, diff);
      for (double& v : step) v *= rho;
      const double eta = norm2(primal);
      const double xi = norm2(step);
      if (eta > opts.mu * xi)
        rho = std::min(2.0 * rho, opts.rho_max);
      else if (xi > opts.mu * eta)
        rho = std::max(0.5 * rho, opts.rho_min);
    }
  }

  FusedFit fit;
  fit.lambda = lambda;
  fit.converged = converged;
  fit.iterations = iterations;
  fit.rho_final = rho;
  fit.gamma.assign(x.begin(), x.begin() + J);
  fit.sigma.resize(J);
  for (std::size_t j = 0; j < J; ++j) fit.sigma[j] = std::exp(x[J + j]);
  fit.u = u;
  fit.dual = s;

  std::vector<std::uint8_t> fused(M);
  for (std::size_t m = 0; m < M; ++m) fused[m] = (u[m] == 0.0);
  fit.groups = connected_components(g, fused);
  fit.num_groups = static_cast<int>(fit.groups.size());

  const GroupedFit refit = fit_grouped(data, fit.groups, opts.fit);
  fit.params = refit.params;
  fit.neg_loglik_value = neg_loglik(data, fit.params);
  fit.converged = fit.converged && refit.converged;
  return fit;
}

double bic(const FusedFit& fit, const ExceedanceData& data) {
  const double total = static_cast<double>(data.total_exceedances());
  const double J = static_cast<double>(data.num_clusters());
  return 2.0 * fit.neg_loglik_value + (J + static_cast<double>(fit.num_groups)) * std::log(total);
}

namespace {

ClusterGraph reweighted(const ClusterGraph& g, const ReweightRule& rule, double lambda) {
  WeightSpec spec = rule.spec;
  if (rule.tie_lambda &&
      (spec.kind == WeightKind::scad_deriv || spec.kind == WeightKind::mcp_deriv))
    spec.lambda = std::max(lambda, 1e-12);
  ClusterGraph out = g;
  out.weights = edge_weights(spec, g, rule.gamma_tilde);
  return out;
}

}  // namespace

PathResult solve_path(const ExceedanceData& data, const ClusterGraph& g,
                      std::span<const double> grid, std::span<const GpdParams> init,
                      const PathOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("solve_path: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("solve_path: grid must be ascending");

  PathResult path;
  path.grid.assign(grid.begin(), grid.end());
  std::vector<GpdParams> warm(init.begin(), init.end());
  AdmmOptions admm_opts = opts.admm;
  double prev_lambda = 0.0;

  for (double lambda : grid) {
    const ClusterGraph active = opts.reweight ? reweighted(g, *opts.reweight, lambda) : g;
    if (!admm_opts.warm_dual.empty() && prev_lambda > 0.0 && lambda > 0.0) {
      // the optimal dual scales with lambda while the active pattern holds
      const double ratio = lambda / prev_lambda;
      for (double& sm : admm_opts.warm_dual) sm *= ratio;
    }
    FusedFit fit;
    bool ok = true;
    try {
      fit = admm_fit(data, active, lambda, warm, admm_opts);
    } catch (const std::exception&) {
      ok = false;
    }
    if (ok) {
      for (std::size_t j = 0; j < warm.size(); ++j)
        warm[j] = GpdParams{fit.gamma[j], fit.sigma[j]};
      admm_opts.warm_dual = fit.dual;
      admm_opts.warm_rho = fit.rho_final;
      prev_lambda = lambda;
      path.bic_values.push_back(bic(fit, data));
    } else {
      fit = FusedFit{};
      fit.lambda = lambda;
      path.bic_values.push_back(kInf);
    }
    path.fits.push_back(std::move(fit));
  }

  for (std::size_t i = 0; i < path.fits.size(); ++i) {
    if (path.fits[i].params.empty()) continue;  // failed point: not selectable
    if (path.selected_index < 0 ||
        path.bic_values[i] <= path.bic_values[static_cast<std::size_t>(path.selected_index)])
      path.selected_index = static_cast<int>(i);
  }
  if (path.selected_index < 0) throw std::runtime_error("solve_path: every grid point failed");
  return path;
}

std::vector<double> default_lambda_grid(const ExceedanceData& data, const ClusterGraph& g,
                                        std::span<const GpdParams> init, const PathOptions& opts,
                                        const GridOptions& gopts) {
  if (gopts.size < 2) throw std::invalid_argument("default_lambda_grid: need at least 2 points");
  AdmmOptions probe_opts = opts.admm;
  probe_opts.max_iter = std::min(probe_opts.max_iter, 600);
  const int kappa = static_cast<int>(connected_components(g).size());

  std::vector<GpdParams> warm(init.begin(), init.end());
  double lambda_max = gopts.max_lambda_cap;
  double prev_lambda = 0.0;
  for (double lambda = 1e-3; lambda <= gopts.max_lambda_cap; lambda *= 2.0) {
    const ClusterGraph active = opts.reweight ? reweighted(g, *opts.reweight, lambda) : g;
    if (!probe_opts.warm_dual.empty() && prev_lambda > 0.0)
      for (double& sm : probe_opts.warm_dual) sm *= lambda / prev_lambda;
    const FusedFit fit = admm_fit(data, active, lambda, warm, probe_opts);
    for (std::size_t j = 0; j < warm.size(); ++j)
      warm[j] = GpdParams{fit.gamma[j], fit.sigma[j]};
    probe_opts.warm_dual = fit.dual;
    probe_opts.warm_rho = fit.rho_final;
    prev_lambda = lambda;
    if (fit.num_groups == kappa) {
      lambda_max = lambda;
      break;
    }
  }

  const double lo = std::log(lambda_max * gopts.min_ratio);
  const double hi = std::log(lambda_max);
  std::vector<double> grid(static_cast<std::size_t>(gopts.size));
  for (int i = 0; i < gopts.size; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(gopts.size - 1));
  return grid;
}

}  // namespace tailfuse
