#include "tailfuse/tail_dep.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tailfuse {

namespace {

// Empirical CDF values rank/n with average ranks on ties.
std::vector<double> ecdf_values(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);  // 1-based average
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = avg_rank / static_cast<double>(n);
    i = j + 1;
  }
  return out;
}

double chi_from_ecdf(std::span<const double> fx, std::span<const double> fy, double u) {
  std::size_t cx = 0, cy = 0, joint = 0;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    const bool ex = fx[i] > u;
    const bool ey = fy[i] > u;
    cx += ex;
    cy += ey;
    joint += ex && ey;
  }
  if (cx == 0 || cy == 0)
    throw std::invalid_argument("chi_hat: no exceedances at level u (degenerate input)");
  const double v = 0.5 * (static_cast<double>(joint) / static_cast<double>(cx) +
                          static_cast<double>(joint) / static_cast<double>(cy));
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

double chi_hat(std::span<const double> x, std::span<const double> y, double u) {
  if (x.size() != y.size()) throw std::invalid_argument("chi_hat: series length mismatch");
  if (x.empty()) throw std::invalid_argument("chi_hat: empty series");
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("chi_hat: u must lie in (0,1)");
  return chi_from_ecdf(ecdf_values(x), ecdf_values(y), u);
}

Matrix chi_matrix(const Matrix& data, double u, unsigned threads) {
  const std::size_t J = data.cols();
  if (J == 0 || data.rows() == 0) throw std::invalid_argument("chi_matrix: empty data");
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("chi_matrix: u must lie in (0,1)");

  std::vector<std::vector<double>> ecdf(J);
  parallel_for(J, [&](std::size_t j) { ecdf[j] = ecdf_values(data.col(j)); }, threads);

  Matrix chi(J, J, 0.0);
  for (std::size_t j = 0; j < J; ++j) chi(j, j) = 1.0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(J * (J - 1) / 2);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = j + 1; k < J; ++k) pairs.emplace_back(j, k);
  parallel_for(
      pairs.size(),
      [&](std::size_t idx) {
        const auto [j, k] = pairs[idx];
        const double v = chi_from_ecdf(ecdf[j], ecdf[k], u);
        chi(j, k) = v;
        chi(k, j) = v;
      },
      threads);
  return chi;
}

}  // namespace tailfuse
