#include "tailfuse/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "tailfuse/math.hpp"

namespace tailfuse {

std::vector<double> equal_count_thresholds(const Matrix& raw, int k) {
  if (k <= 0 || static_cast<std::size_t>(k) + 1 > raw.rows())
    throw std::invalid_argument("equal_count_thresholds: need 1 <= k <= n-1");
  std::vector<double> thresholds(raw.cols());
  std::vector<double> col;
  for (std::size_t j = 0; j < raw.cols(); ++j) {
    col.assign(raw.col(j).begin(), raw.col(j).end());
    std::nth_element(col.begin(), col.begin() + k, col.end(), std::greater<>());
    thresholds[j] = col[k];  // (k+1)-th descending order statistic
  }
  return thresholds;
}

namespace {

// mean squared QQ residual of one sorted-descending column at given params
double column_risk(std::span<const double> sorted_desc, int k, double w, const GpdParams& p) {
  double risk = 0.0;
  for (int i = 1; i <= k; ++i) {
    const double prob = static_cast<double>(i) / (static_cast<double>(k) + 0.5);
    const double q = gpd_quantile(1.0 - prob, p);  // upper-tail prob
    const double resid = (sorted_desc[static_cast<std::size_t>(i - 1)] - w) - q;
    risk += resid * resid;
  }
  return risk / static_cast<double>(k);
}

}  // namespace

double qq_risk(const Matrix& raw, int k, const FitOptions& opts) {
  if (k < static_cast<int>(opts.min_exceedances))
    throw std::invalid_argument("qq_risk: k below the minimum fit size");
  if (static_cast<std::size_t>(k) + 1 > raw.rows())
    throw std::invalid_argument("qq_risk: k too large for the sample");

  double total = 0.0;
  std::size_t used = 0;
  std::vector<double> col;
  for (std::size_t j = 0; j < raw.cols(); ++j) {
    col.assign(raw.col(j).begin(), raw.col(j).end());
    std::sort(col.begin(), col.end(), std::greater<>());
    const double w = col[k];

    ExceedanceData data;
    data.clusters.resize(1);
    data.clusters[0].threshold = w;
    data.clusters[0].raw_count = static_cast<std::int64_t>(raw.rows());
    for (int i = 0; i < k; ++i) {
      const double y = col[i] - w;
      if (y > 0.0) data.clusters[0].exceedances.push_back(y);
    }
    if (data.clusters[0].exceedances.size() < opts.min_exceedances) continue;  // heavy ties

    ClusterFit fit;
    try {
      fit = fit_clusterwise(data, opts)[0];
    } catch (const std::exception&) {
      continue;
    }
    if (!fit.params.valid()) continue;

    total += column_risk(col, k, w, fit.params);
    ++used;
  }
  if (used == 0) throw std::runtime_error("qq_risk: no cluster produced a usable fit");
  return total / static_cast<double>(used);
}

double qq_risk_given(const Matrix& raw, int k, std::span<const GpdParams> params) {
  if (params.size() != raw.cols())
    throw std::invalid_argument("qq_risk_given: one parameter pair per cluster required");
  if (k <= 0 || static_cast<std::size_t>(k) + 1 > raw.rows())
    throw std::invalid_argument("qq_risk_given: k out of range");
  double total = 0.0;
  std::vector<double> col;
  for (std::size_t j = 0; j < raw.cols(); ++j) {
    col.assign(raw.col(j).begin(), raw.col(j).end());
    std::sort(col.begin(), col.end(), std::greater<>());
    total += column_risk(col, k, col[static_cast<std::size_t>(k)], params[j]);
  }
  return total / static_cast<double>(raw.cols());
}

RiskPath risk_path(const Matrix& raw, std::span<const int> ks, const FitOptions& opts) {
  RiskPath path;
  for (int k : ks) {
    path.ks.push_back(k);
    path.risks.push_back(qq_risk(raw, k, opts));
  }
  return path;
}

SelectedK select_k(const RiskPath& path, SelectKMethod method, std::optional<int> manual_k) {
  if (path.ks.empty()) throw std::invalid_argument("select_k: empty path");
  if (method == SelectKMethod::manual) {
    if (!manual_k) throw std::invalid_argument("select_k: manual method needs a k");
    return {*manual_k, false};
  }

  const auto argmin =
      std::distance(path.risks.begin(), std::min_element(path.risks.begin(), path.risks.end()));
  if (method == SelectKMethod::min) return {path.ks[argmin], false};

  // stability: centered moving average, window 5
  const std::size_t n = path.risks.size();
  std::vector<double> ma(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(i + 2, n - 1);
    double s = 0.0;
    for (std::size_t t = lo; t <= hi; ++t) s += path.risks[t];
    ma[i] = s / static_cast<double>(hi - lo + 1);
  }
  constexpr std::size_t kLookahead = 10;
  for (std::size_t i = 0; i + kLookahead < n; ++i) {
    bool stable = true;
    const double scale = std::max(std::abs(ma[i]), 1e-300);
    for (std::size_t o = 1; o <= kLookahead && stable; ++o)
      stable = std::abs(ma[i + o] - ma[i]) < 0.02 * scale;
    if (stable) return {path.ks[i], false};
  }
  return {path.ks[argmin], true};
}

std::vector<MrlPoint> mean_residual_life(std::span<const double> x,
                                         std::span<const double> thresholds) {
  std::vector<MrlPoint> out;
  for (double w : thresholds) {
    double sum = 0.0, sumsq = 0.0;
    long m = 0;
    for (double v : x) {
      if (v > w) {
        const double e = v - w;
        sum += e;
        sumsq += e * e;
        ++m;
      }
    }
    if (m < 2) continue;
    const double mean = sum / static_cast<double>(m);
    const double var = (sumsq - sum * mean) / static_cast<double>(m - 1);
    const double half = normal_quantile(0.975) * std::sqrt(std::max(var, 0.0) / m);
    out.push_back({w, mean, mean - half, mean + half, m});
  }
  return out;
}

}  // namespace tailfuse
