#pragma once

#include <cstdint>

namespace tailfuse {

/// Return level with its delta-method confidence interval. group_size_n is
/// the total exceedance count n_A behind the shared shape estimate; for an
/// ungrouped fit it equals cluster_n.
struct ReturnLevelEstimate {
  double tau = 0.0;
  double point = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::int64_t group_size_n = 0;
  std::int64_t cluster_n = 0;
  std::int64_t raw_n = 0;
  bool boundary = false;  // 2*gamma+1 <= 0: sigma variance pinned at the box edge
};

/// tau-return level w + sigma/(gamma(gamma+1)) * ((tau/xi)^(-gamma) - 1),
/// continuous through gamma = 0. Requires 0 < tau < xi <= 1.
double return_level(double gamma, double sigma, double tau, double xi, double w);

/// P(X > x) = xi * H((x-w) | gamma, sigma) for x > w.
double exceed_prob(double gamma, double sigma, double xi, double w, double x);

struct RlDerivs {
  double d_gamma = 0.0;
  double d_sigma = 0.0;
  double d_xi = 0.0;
};

/// Analytic partial derivatives of return_level in (gamma, sigma, xi).
RlDerivs return_level_derivs(double gamma, double sigma, double tau, double xi);

/// Everything the delta-method variance needs from one fitted cluster.
struct RlContext {
  double gamma_hat = 0.0;
  double sigma_hat = 1.0;
  double xi_hat = 1.0;
  double threshold = 0.0;
  std::int64_t n_group = 0;    // n_A: exceedances behind the shared gamma
  std::int64_t n_cluster = 0;  // n_j
  std::int64_t n_raw = 0;      // n
};

/// 100(1-p)% interval: point +- z_{p/2} * sqrt(Rg^2 (g+1)^2 / n_A
/// + Rs^2 s^2 (2g+1) / n_j + Rx^2 xi(1-xi) / n).
ReturnLevelEstimate return_level_ci(const RlContext& ctx, double tau, double p = 0.05);

}  // namespace tailfuse
