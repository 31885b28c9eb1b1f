#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tailfuse/optim.hpp"

namespace tailfuse {

/// GPD parameters in the orthogonal parameterization: the scale is
/// sigma = xi_w * (gamma + 1), which makes the shape and scale MLEs
/// asymptotically independent.
struct GpdParams {
  double gamma = 0.0;
  double sigma = 1.0;
  bool valid() const;
};

/// Threshold exceedances of one cluster. Only y = x - w > 0 is stored;
/// raw_count is the full sample size behind the exceedances.
struct ClusterData {
  std::vector<double> exceedances;
  std::int64_t raw_count = 0;
  double threshold = 0.0;

  std::size_t effective_count() const { return exceedances.size(); }
  double exceed_prob_hat() const {
    return raw_count > 0 ? static_cast<double>(exceedances.size()) / static_cast<double>(raw_count)
                         : 0.0;
  }
};

struct ExceedanceData {
  std::vector<ClusterData> clusters;

  std::size_t num_clusters() const { return clusters.size(); }
  std::int64_t total_exceedances() const;

  /// Per-column exceedances of a data matrix over given thresholds
  /// (one threshold per column). Values <= w are dropped.
  static ExceedanceData from_matrix(const class Matrix& data, std::span<const double> thresholds);
};

struct FisherInfo {
  double gamma_gamma = 0.0;  // 1/(gamma+1)^2
  double gamma_sigma = 0.0;  // 0 in this parameterization
  double sigma_sigma = 0.0;  // 1/((2*gamma+1)*sigma^2)
};

struct GpdGrad {
  double d_gamma = 0.0;
  double d_sigma = 0.0;
};

/// log h(y | gamma, sigma) of the rescaled density
/// h = (gamma+1)/sigma * (1 + gamma(gamma+1) y / sigma)^(-1/gamma - 1).
/// Throws std::domain_error past the finite endpoint (gamma < 0) and
/// std::invalid_argument for bad inputs.
double log_density(double y, const GpdParams& p);

/// Analytic (d/dgamma, d/dsigma) of log_density; stable through gamma = 0.
GpdGrad log_density_grad(double y, const GpdParams& p);

/// Like log_density but returns -inf out of domain instead of throwing;
/// the form the optimizers evaluate.
double log_density_unchecked(double y, const GpdParams& p) noexcept;

/// Gradient without domain checks; caller guarantees y is inside the support.
GpdGrad log_density_grad_unchecked(double y, double gamma, double sigma) noexcept;

/// Value and gradient in one pass; log_density is -inf out of domain and the
/// gradient is then meaningless. The optimizer hot loops live on this.
struct GpdValueGrad {
  double log_density;
  double d_gamma;
  double d_sigma;
};
GpdValueGrad log_density_value_grad(double y, double gamma, double sigma) noexcept;

double gpd_cdf(double x, const GpdParams& p);
double gpd_survival(double x, const GpdParams& p);
double gpd_quantile(double prob, const GpdParams& p);

/// Negative log-likelihood summed over clusters, one parameter pair each.
double neg_loglik(const ExceedanceData& data, std::span<const GpdParams> params);

/// Cluster-separable gradient of neg_loglik.
std::vector<GpdGrad> grad_neg_loglik(const ExceedanceData& data, std::span<const GpdParams> params);

struct FitOptions {
  double gamma_lo = -0.5 + 1e-4;
  double gamma_hi = 10.0;
  double grad_tol = 1e-8;
  int max_iter = 500;
  std::size_t min_exceedances = 10;
};

struct ClusterFit {
  GpdParams params;
  bool converged = false;
  int iterations = 0;
};

/// Per-cluster maximum likelihood over (gamma, log sigma), multi-start on
/// non-convergence. Throws std::invalid_argument when a cluster has fewer
/// than opts.min_exceedances points.
std::vector<ClusterFit> fit_clusterwise(const ExceedanceData& data, const FitOptions& opts = {});

struct GroupedFit {
  std::vector<double> group_gamma;      // one shared shape per group
  std::vector<GpdParams> params;        // per cluster, gamma copied from its group
  std::vector<bool> group_converged;
  bool converged = false;
};

/// Joint MLE with a single shape per group and cluster-specific scales.
/// The partition must cover {0..J-1} exactly once.
GroupedFit fit_grouped(const ExceedanceData& data, const std::vector<std::vector<int>>& partition,
                       const FitOptions& opts = {});

FisherInfo fisher_info(const GpdParams& p);

}  // namespace tailfuse
