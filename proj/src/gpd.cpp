#include "tailfuse/gpd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tailfuse/math.hpp"
#include "tailfuse/util.hpp"

namespace tailfuse {

namespace {

// Shared pieces of the density at one point: t = y/sigma, x = g(1+g)t,
// z = 1 + x. z <= 0 marks a point past the finite endpoint.
struct Eval {
  double t, x, z;
};

inline Eval eval_point(double y, double gamma, double sigma) {
  const double t = y / sigma;
  const double x = gamma * (1.0 + gamma) * t;
  return {t, x, 1.0 + x};
}

// log1pmx(x)/gamma with the 1/gamma absorbed analytically near x = 0,
// where log1pmx(x) = x^2 * c(x) and x^2/gamma = gamma (1+gamma)^2 t^2.
inline double log1pmx_over_gamma(const Eval& e, double gamma) {
  if (std::abs(e.x) < 1e-4) {
    const double gp1 = 1.0 + gamma;
    const double c = -0.5 + e.x * (1.0 / 3.0 + e.x * (-0.25 + e.x * 0.2));
    return gamma * gp1 * gp1 * e.t * e.t * c;
  }
  return log1pmx(e.x) / gamma;
}

// log1pmx(x)/gamma^2, same trick one power down.
inline double log1pmx_over_gamma2(const Eval& e, double gamma) {
  if (std::abs(e.x) < 1e-4) {
    const double gp1 = 1.0 + gamma;
    const double c = -0.5 + e.x * (1.0 / 3.0 + e.x * (-0.25 + e.x * 0.2));
    return gp1 * gp1 * e.t * e.t * c;
  }
  return log1pmx(e.x) / (gamma * gamma);
}

// The log1pmx split keeps everything smooth through gamma = 0, but it
// reassembles log z from two pieces that grow like x, so it is only used
// while |x| stays moderate; past that the direct form has no cancellation
// (and gamma is necessarily away from 0 there unless t is astronomical).
constexpr double kSplitLimit = 1.0;

inline double log_density_core(double y, double gamma, double sigma) noexcept {
  const Eval e = eval_point(y, gamma, sigma);
  if (!(e.z > 0.0)) return -kInf;
  const double gp1 = 1.0 + gamma;
  if (std::abs(e.x) <= kSplitLimit) {
    return std::log1p(gamma) - std::log(sigma) - gp1 * gp1 * e.t -
           gp1 * log1pmx_over_gamma(e, gamma);
  }
  return std::log1p(gamma) - std::log(sigma) - (1.0 / gamma + 1.0) * std::log1p(e.x);
}

inline GpdGrad grad_core(double y, double gamma, double sigma) noexcept {
  const Eval e = eval_point(y, gamma, sigma);
  const double gp1 = 1.0 + gamma;
  GpdGrad g;
  if (std::abs(e.x) <= kSplitLimit) {
    const double s = log1pmx_over_gamma2(e, gamma);
    g.d_gamma = 1.0 / gp1 + s + gp1 * e.t * (gp1 * e.t - 2.0) / e.z;
  } else {
    g.d_gamma = 1.0 / gp1 + std::log1p(e.x) / (gamma * gamma) -
                gp1 * (2.0 * gamma + 1.0) * e.t / (gamma * e.z);
  }
  g.d_sigma = (-1.0 + gp1 * gp1 * e.t / e.z) / sigma;
  return g;
}

void check_params(const GpdParams& p) {
  if (!p.valid()) throw std::invalid_argument("GpdParams: need gamma > -0.5 and sigma > 0");
}

}  // namespace

bool GpdParams::valid() const {
  return std::isfinite(gamma) && std::isfinite(sigma) && gamma > -0.5 && sigma > 0.0;
}

std::int64_t ExceedanceData::total_exceedances() const {
  std::int64_t n = 0;
  for (const auto& c : clusters) n += static_cast<std::int64_t>(c.exceedances.size());
  return n;
}

ExceedanceData ExceedanceData::from_matrix(const Matrix& data, std::span<const double> thresholds) {
  if (thresholds.size() != data.cols())
    throw std::invalid_argument("from_matrix: one threshold per column required");
  ExceedanceData out;
  out.clusters.resize(data.cols());
  for (std::size_t j = 0; j < data.cols(); ++j) {
    auto& c = out.clusters[j];
    c.threshold = thresholds[j];
    c.raw_count = static_cast<std::int64_t>(data.rows());
    for (double v : data.col(j))
      if (v > thresholds[j]) c.exceedances.push_back(v - thresholds[j]);
  }
  return out;
}

double log_density(double y, const GpdParams& p) {
  check_params(p);
  if (!(y > 0.0) || !std::isfinite(y)) throw std::invalid_argument("log_density: need y > 0");
  const double v = log_density_core(y, p.gamma, p.sigma);
  if (v == -kInf) {
    const double endpoint = p.sigma / (-p.gamma * (p.gamma + 1.0));
    throw std::domain_error("log_density: y = " + std::to_string(y) +
                            " exceeds the upper endpoint " + std::to_string(endpoint));
  }
  return v;
}

double log_density_unchecked(double y, const GpdParams& p) noexcept {
  return log_density_core(y, p.gamma, p.sigma);
}

GpdGrad log_density_grad_unchecked(double y, double gamma, double sigma) noexcept {
  return grad_core(y, gamma, sigma);
}

GpdValueGrad log_density_value_grad(double y, double gamma, double sigma) noexcept {
  const Eval e = eval_point(y, gamma, sigma);
  if (!(e.z > 0.0)) return {-kInf, 0.0, 0.0};
  const double gp1 = 1.0 + gamma;
  GpdValueGrad out;
  if (std::abs(e.x) <= kSplitLimit) {
    out.log_density = std::log1p(gamma) - std::log(sigma) - gp1 * gp1 * e.t -
                      gp1 * log1pmx_over_gamma(e, gamma);
    out.d_gamma = 1.0 / gp1 + log1pmx_over_gamma2(e, gamma) +
                  gp1 * e.t * (gp1 * e.t - 2.0) / e.z;
  } else {
    const double logz = std::log1p(e.x);
    out.log_density = std::log1p(gamma) - std::log(sigma) - (1.0 / gamma + 1.0) * logz;
    out.d_gamma = 1.0 / gp1 + logz / (gamma * gamma) -
                  gp1 * (2.0 * gamma + 1.0) * e.t / (gamma * e.z);
  }
  out.d_sigma = (-1.0 + gp1 * gp1 * e.t / e.z) / sigma;
  return out;
}

GpdGrad log_density_grad(double y, const GpdParams& p) {
  log_density(y, p);  // runs the domain checks
  return grad_core(y, p.gamma, p.sigma);
}

double gpd_survival(double x, const GpdParams& p) {
  check_params(p);
  if (x <= 0.0) return 1.0;
  const Eval e = eval_point(x, p.gamma, p.sigma);
  if (!(e.z > 0.0)) return 0.0;  // past the finite endpoint
  // (1+x)^(-1/g) = exp(-(1+g) t * log1p(x)/x)
  return std::exp(-(1.0 + p.gamma) * e.t * log1p_over_x(e.x));
}

double gpd_cdf(double x, const GpdParams& p) { return 1.0 - gpd_survival(x, p); }

double gpd_quantile(double prob, const GpdParams& p) {
  check_params(p);
  if (!(prob >= 0.0 && prob < 1.0)) throw std::invalid_argument("gpd_quantile: prob in [0,1)");
  if (prob == 0.0) return 0.0;
  // sigma/(g(g+1)) * ((1-p)^(-g) - 1) via the expm1 ratio on L = log(1-p)
  return p.sigma / (p.gamma + 1.0) * expm1_ratio(p.gamma, std::log1p(-prob));
}

double neg_loglik(const ExceedanceData& data, std::span<const GpdParams> params) {
  if (params.size() != data.num_clusters())
    throw std::invalid_argument("neg_loglik: one parameter pair per cluster required");
  double total = 0.0;
  for (std::size_t j = 0; j < params.size(); ++j) {
    check_params(params[j]);
    for (double y : data.clusters[j].exceedances) total -= log_density(y, params[j]);
  }
  return total;
}

std::vector<GpdGrad> grad_neg_loglik(const ExceedanceData& data,
                                     std::span<const GpdParams> params) {
  if (params.size() != data.num_clusters())
    throw std::invalid_argument("grad_neg_loglik: one parameter pair per cluster required");
  std::vector<GpdGrad> out(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    check_params(params[j]);
    double dg = 0.0, ds = 0.0;
    for (double y : data.clusters[j].exceedances) {
      log_density(y, params[j]);  // domain check
      const GpdGrad g = grad_core(y, params[j].gamma, params[j].sigma);
      dg -= g.d_gamma;
      ds -= g.d_sigma;
    }
    out[j] = {dg, ds};
  }
  return out;
}

namespace {

// Negative log-likelihood of one cluster over x = (gamma, theta = log sigma),
// with the analytic gradient in the same variables.
double cluster_objective(std::span<const double> y, double gamma, double theta,
                         double* d_gamma, double* d_theta) {
  const double sigma = std::exp(theta);
  double f = 0.0, dg = 0.0, dt = 0.0;
  for (double yi : y) {
    const GpdValueGrad v = log_density_value_grad(yi, gamma, sigma);
    if (v.log_density == -kInf) return kInf;
    f -= v.log_density;
    dg -= v.d_gamma;
    dt -= v.d_sigma * sigma;
  }
  if (d_gamma) *d_gamma = dg;
  if (d_theta) *d_theta = dt;
  return f;
}

ClusterFit fit_one_cluster(std::span<const double> y, const FitOptions& opts) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  const std::vector<double> lower = {opts.gamma_lo, -kInf};
  const std::vector<double> upper = {opts.gamma_hi, kInf};
  OptimOptions oopts;
  oopts.max_iter = opts.max_iter;
  oopts.grad_tol = opts.grad_tol;

  ObjectiveFn fn = [&](std::span<const double> x, std::span<double> grad) {
    return cluster_objective(y, x[0], x[1], &grad[0], &grad[1]);
  };

  ClusterFit best;
  double best_value = kInf;
  for (double gamma0 : {0.1, -0.2, 0.5}) {
    OptimResult r;
    try {
      r = minimize_lbfgs(fn, {gamma0, std::log(mean)}, lower, upper, oopts);
    } catch (const std::invalid_argument&) {
      continue;  // start outside the support of this restart's shape
    }
    if (r.converged || r.value < best_value) {
      best_value = std::min(best_value, r.value);
      best = {GpdParams{r.x[0], std::exp(r.x[1])}, r.converged, r.iterations};
      if (r.converged) break;
    }
  }
  return best;
}

}  // namespace

std::vector<ClusterFit> fit_clusterwise(const ExceedanceData& data, const FitOptions& opts) {
  std::vector<ClusterFit> fits(data.num_clusters());
  for (std::size_t j = 0; j < data.num_clusters(); ++j) {
    const auto& y = data.clusters[j].exceedances;
    if (y.size() < opts.min_exceedances)
      throw std::invalid_argument("fit_clusterwise: cluster " + std::to_string(j + 1) + " has " +
                                  std::to_string(y.size()) + " exceedances, need at least " +
                                  std::to_string(opts.min_exceedances));
    fits[j] = fit_one_cluster(y, opts);
  }
  return fits;
}

GroupedFit fit_grouped(const ExceedanceData& data, const std::vector<std::vector<int>>& partition,
                       const FitOptions& opts) {
  const std::size_t J = data.num_clusters();
  std::vector<int> seen(J, 0);
  for (const auto& group : partition)
    for (int j : group) {
      if (j < 0 || static_cast<std::size_t>(j) >= J)
        throw std::invalid_argument("fit_grouped: cluster index out of range");
      ++seen[j];
    }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
    throw std::invalid_argument("fit_grouped: partition must cover every cluster exactly once");

  GroupedFit out;
  out.params.resize(J);
  out.group_gamma.resize(partition.size());
  out.group_converged.resize(partition.size());
  out.converged = true;

  for (std::size_t k = 0; k < partition.size(); ++k) {
    const auto& group = partition[k];
    std::vector<double> means(group.size());
    for (std::size_t a = 0; a < group.size(); ++a) {
      const auto& y = data.clusters[group[a]].exceedances;
      if (y.size() < opts.min_exceedances)
        throw std::invalid_argument("fit_grouped: cluster " + std::to_string(group[a] + 1) +
                                    " has too few exceedances");
      means[a] = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    }

    // x = (gamma, theta_1 .. theta_m)
    const std::size_t dim = group.size() + 1;
    std::vector<double> lower(dim, -kInf), upper(dim, kInf);
    lower[0] = opts.gamma_lo;
    upper[0] = opts.gamma_hi;
    OptimOptions oopts;
    oopts.max_iter = opts.max_iter;
    oopts.grad_tol = opts.grad_tol;

    ObjectiveFn fn = [&](std::span<const double> x, std::span<double> grad) {
      double f = 0.0;
      grad[0] = 0.0;
      for (std::size_t a = 0; a < group.size(); ++a) {
        double dg = 0.0, dt = 0.0;
        const double fa = cluster_objective(data.clusters[group[a]].exceedances, x[0], x[1 + a],
                                            &dg, &dt);
        if (fa == kInf) return kInf;
        f += fa;
        grad[0] += dg;
        grad[1 + a] = dt;
      }
      return f;
    };

    OptimResult best;
    best.value = kInf;
    for (double gamma0 : {0.1, -0.2, 0.5}) {
      std::vector<double> x0(dim);
      x0[0] = gamma0;
      for (std::size_t a = 0; a < group.size(); ++a) x0[1 + a] = std::log(means[a]);
      OptimResult r;
      try {
        r = minimize_lbfgs(fn, std::move(x0), lower, upper, oopts);
      } catch (const std::invalid_argument&) {
        continue;
      }
      if (r.converged || r.value < best.value) best = std::move(r);
      if (best.converged) break;
    }
    if (best.x.empty()) throw std::runtime_error("fit_grouped: no feasible start found");

    out.group_gamma[k] = best.x[0];
    out.group_converged[k] = best.converged;
    out.converged = out.converged && best.converged;
    for (std::size_t a = 0; a < group.size(); ++a)
      out.params[group[a]] = {best.x[0], std::exp(best.x[1 + a])};
  }
  return out;
}

FisherInfo fisher_info(const GpdParams& p) {
  check_params(p);
  const double gp1 = p.gamma + 1.0;
  FisherInfo info;
  info.gamma_gamma = 1.0 / (gp1 * gp1);
  info.gamma_sigma = 0.0;
  info.sigma_sigma = 1.0 / ((2.0 * p.gamma + 1.0) * p.sigma * p.sigma);
  return info;
}

}  // namespace tailfuse
