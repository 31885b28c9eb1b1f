#pragma once

#include <span>

#include "tailfuse/util.hpp"

namespace tailfuse {

/// Empirical tail-dependence coefficient of two series at level u:
/// the rank-based estimate of P(F_k > u | F_j > u), symmetrized by
/// averaging the two conditioning directions. Ranks use average ties.
double chi_hat(std::span<const double> x, std::span<const double> y, double u);

/// Pairwise chi over all columns; diagonal fixed at 1.
Matrix chi_matrix(const Matrix& data, double u = 0.98, unsigned threads = 0);

}  // namespace tailfuse
