#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tailfuse/gpd.hpp"
#include "tailfuse/util.hpp"

namespace tailfuse {

/// QQ-risk of fitting the top-k exceedances per cluster: the squared
/// distance between sorted exceedances and fitted GPD quantiles at
/// p_i = i/(k+0.5), averaged within and then across clusters. Clusters
/// whose fit fails are dropped and the average renormalized.
double qq_risk(const Matrix& raw, int k, const FitOptions& opts = {});

/// Same risk evaluated at supplied per-cluster parameters instead of
/// refitting; zero exactly when the data equal the model quantiles.
double qq_risk_given(const Matrix& raw, int k, std::span<const GpdParams> params);

struct RiskPath {
  std::vector<int> ks;
  std::vector<double> risks;
};

RiskPath risk_path(const Matrix& raw, std::span<const int> ks, const FitOptions& opts = {});

enum class SelectKMethod { manual, min, stability };

struct SelectedK {
  int k = 0;
  bool fell_back = false;  // stability found no stable point; argmin used
};

/// manual returns the supplied k; min the argmin of R(k); stability the
/// smallest k whose centered moving average (window 5) stays within 2%
/// over the next 10 grid points.
SelectedK select_k(const RiskPath& path, SelectKMethod method,
                   std::optional<int> manual_k = std::nullopt);

struct MrlPoint {
  double threshold = 0.0;
  double mean_excess = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  long count = 0;
};

/// Mean residual life: mean excess over each threshold with a normal-
/// approximation 95% interval. Thresholds with fewer than two exceedances
/// are omitted.
std::vector<MrlPoint> mean_residual_life(std::span<const double> x,
                                         std::span<const double> thresholds);

/// Per-cluster thresholds making every effective sample size equal to k:
/// the (k+1)-th descending order statistic of each column.
std::vector<double> equal_count_thresholds(const Matrix& raw, int k);

}  // namespace tailfuse
