#include "tailfuse/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "tailfuse/gpd.hpp"
#include "tailfuse/math.hpp"

namespace tailfuse {

namespace {

void check_rl_args(double gamma, double sigma, double tau, double xi, bool allow_tau_eq_xi) {
  if (!(gamma > -0.5) || !(sigma > 0.0))
    throw std::invalid_argument("return_level: need gamma > -0.5 and sigma > 0");
  if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("return_level: xi must lie in (0,1]");
  if (!(tau > 0.0) || tau > xi || (tau == xi && !allow_tau_eq_xi))
    throw std::domain_error("return_level: tau must lie in (0, xi); the level is not in the tail");
}

}  // namespace

double return_level(double gamma, double sigma, double tau, double xi, double w) {
  check_rl_args(gamma, sigma, tau, xi, /*allow_tau_eq_xi=*/true);
  if (tau == xi) return w;  // quantile at the threshold itself
  const double L = std::log(tau / xi);  // negative
  return w + sigma / (gamma + 1.0) * expm1_ratio(gamma, L);
}

double exceed_prob(double gamma, double sigma, double xi, double w, double x) {
  if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("exceed_prob: xi must lie in (0,1]");
  if (!(x > w)) throw std::invalid_argument("exceed_prob: need x > w");
  return xi * gpd_survival(x - w, GpdParams{gamma, sigma});
}

RlDerivs return_level_derivs(double gamma, double sigma, double tau, double xi) {
  check_rl_args(gamma, sigma, tau, xi, /*allow_tau_eq_xi=*/false);
  const double L = std::log(tau / xi);
  const double gp1 = gamma + 1.0;
  const double em = expm1_ratio(gamma, L);          // ((tau/xi)^(-g) - 1)/g
  const double dem = expm1_ratio_dg(gamma, L);      // its gamma derivative
  const double pow_term = std::exp(-gamma * L);     // (tau/xi)^(-g)
  RlDerivs d;
  d.d_sigma = em / gp1;
  d.d_gamma = sigma * (dem / gp1 - em / (gp1 * gp1));
  d.d_xi = sigma * pow_term / (gp1 * xi);
  return d;
}

ReturnLevelEstimate return_level_ci(const RlContext& ctx, double tau, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("return_level_ci: p must lie in (0,1)");
  if (ctx.n_group <= 0 || ctx.n_cluster <= 0 || ctx.n_raw <= 0)
    throw std::invalid_argument("return_level_ci: sample counts must be positive");

  ReturnLevelEstimate est;
  est.tau = tau;
  est.group_size_n = ctx.n_group;
  est.cluster_n = ctx.n_cluster;
  est.raw_n = ctx.n_raw;
  est.point = return_level(ctx.gamma_hat, ctx.sigma_hat, tau, ctx.xi_hat, ctx.threshold);

  const RlDerivs d = return_level_derivs(ctx.gamma_hat, ctx.sigma_hat, tau, ctx.xi_hat);
  const double gp1 = ctx.gamma_hat + 1.0;
  double two_g_p1 = 2.0 * ctx.gamma_hat + 1.0;
  if (two_g_p1 <= 0.0) {
    // outside the admissible-variance region; pin at the box edge and flag
    two_g_p1 = 2.0 * (-0.5 + 1e-4) + 1.0;
    est.boundary = true;
  }
  const double var_gamma = d.d_gamma * d.d_gamma * gp1 * gp1 / static_cast<double>(ctx.n_group);
  const double var_sigma = d.d_sigma * d.d_sigma * ctx.sigma_hat * ctx.sigma_hat * two_g_p1 /
                           static_cast<double>(ctx.n_cluster);
  const double var_xi = d.d_xi * d.d_xi * ctx.xi_hat * (1.0 - ctx.xi_hat) /
                        static_cast<double>(ctx.n_raw);
  const double half = normal_quantile(1.0 - p / 2.0) * std::sqrt(var_gamma + var_sigma + var_xi);
  est.ci_lower = est.point - half;
  est.ci_upper = est.point + half;
  return est;
}

}  // namespace tailfuse
