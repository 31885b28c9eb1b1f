#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tailfuse/gpd.hpp"
#include "tailfuse/graph.hpp"
#include "tailfuse/penalty.hpp"

namespace tailfuse {

/// sgn(z) * max(|z| - t, 0).
double soft_threshold(double z, double t);

struct AdmmOptions {
  double eps_abs = 1e-5;
  double eps_rel = 1e-5;
  int max_iter = 2000;
  double rho_init = 1.0;
  double rho_min = 1e-6;
  double rho_max = 1e6;
  double mu = 5.0;            // step-size balance factor
  int rho_freeze_iter = 1000;  // no adaptation past this iteration
  int inner_max_iter = 200;
  double inner_grad_tol = 1e-8;
  bool conventional_order = false;  // (gamma,sigma) first, dual last
  FitOptions fit;                   // box and tolerances shared with the refit

  // warm-start state carried between neighboring solves (the path sweep
  // fills these); empty/zero means cold start
  std::vector<double> warm_dual;
  double warm_rho = 0.0;
};

/// Solution of the penalized problem at one lambda. params hold the grouped
/// refit (shapes exactly equal within a group); gamma/sigma keep the raw
/// ADMM iterate for warm starts and objective evaluation.
struct FusedFit {
  double lambda = 0.0;
  std::vector<GpdParams> params;
  std::vector<double> gamma;
  std::vector<double> sigma;
  std::vector<double> u;
  std::vector<double> dual;
  std::vector<std::vector<int>> groups;
  int num_groups = 0;
  double neg_loglik_value = 0.0;  // at the refitted estimates
  bool converged = false;
  int iterations = 0;
  double rho_final = 0.0;
};

/// ADMM for min l(gamma, sigma) + lambda * sum_m v_m |(D gamma)_m| with the
/// update order u -> dual -> smooth subproblem and the doubling/halving
/// step-size rule. Groups are the connected components of the edges whose
/// u entry is exactly zero; the refit makes their shapes exactly equal.
FusedFit admm_fit(const ExceedanceData& data, const ClusterGraph& g, double lambda,
                  std::span<const GpdParams> init, const AdmmOptions& opts = {});

/// -2 log-likelihood at the refit plus (J + K) log(sum_j n_j).
double bic(const FusedFit& fit, const ExceedanceData& data);

/// Recompute edge weights per grid point from frozen cluster-wise estimates.
/// With tie_lambda the spec's threshold scale follows the grid lambda.
struct ReweightRule {
  WeightSpec spec;
  std::vector<double> gamma_tilde;
  bool tie_lambda = true;
};

struct PathOptions {
  AdmmOptions admm;
  std::optional<ReweightRule> reweight;
};

struct PathResult {
  std::vector<double> grid;
  std::vector<FusedFit> fits;
  std::vector<double> bic_values;
  int selected_index = -1;

  const FusedFit& selected() const { return fits.at(static_cast<std::size_t>(selected_index)); }
};

/// Warm-started sweep over an ascending lambda grid; BIC per point, selected
/// model is the BIC argmin with ties resolved toward larger lambda. Grid
/// points whose fit fails are kept but never selected.
PathResult solve_path(const ExceedanceData& data, const ClusterGraph& g,
                      std::span<const double> grid, std::span<const GpdParams> init,
                      const PathOptions& opts = {});

struct GridOptions {
  int size = 50;
  double min_ratio = 1e-4;
  double max_lambda_cap = 1e9;
};

/// Log-spaced grid up to the smallest tested lambda reaching full fusion
/// (doubling search), per the path's weighting rule.
std::vector<double> default_lambda_grid(const ExceedanceData& data, const ClusterGraph& g,
                                        std::span<const GpdParams> init,
                                        const PathOptions& opts = {}, const GridOptions& gopts = {});

}  // namespace tailfuse
