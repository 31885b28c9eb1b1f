#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tailfuse {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// log(1+x) - x, accurate for small |x| where the direct form cancels.
inline double log1pmx(double x) {
  if (std::abs(x) < 1e-4) {
    // x^2 * (-1/2 + x/3 - x^2/4 + x^3/5); next term is below 1e-25 here
    return x * x * (-0.5 + x * (1.0 / 3.0 + x * (-0.25 + x * 0.2)));
  }
  return std::log1p(x) - x;
}

/// log(1+x)/x, continuous through x = 0.
inline double log1p_over_x(double x) {
  if (std::abs(x) < 1e-4) {
    return 1.0 + x * (-0.5 + x * (1.0 / 3.0 + x * (-0.25 + x * 0.2)));
  }
  return std::log1p(x) / x;
}

/// (exp(-g*L) - 1)/g, the building block of GPD quantiles; -L at g = 0.
inline double expm1_ratio(double g, double L) {
  if (g == 0.0) return -L;
  return std::expm1(-g * L) / g;
}

/// d/dg of expm1_ratio(g, L); L^2/2 at g = 0.
inline double expm1_ratio_dg(double g, double L) {
  const double gl = g * L;
  if (std::abs(gl) < 1e-4) {
    // series: L^2/2 - g L^3/3 + g^2 L^4/8 - g^3 L^5/30
    return L * L * (0.5 + gl * (-1.0 / 3.0 + gl * (0.125 - gl / 30.0)));
  }
  const double e = std::exp(-gl);
  return (-g * L * e - std::expm1(-gl)) / (g * g);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

inline double normal_pdf(double z) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

/// Inverse standard normal CDF. Abramowitz-Stegun 26.2.23 start refined by
/// Newton steps on erfc; accurate to ~1e-15 over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");
  if (p == 0.5) return 0.0;
  const bool lower = p < 0.5;
  const double pp = lower ? p : 1.0 - p;  // upper-tail mass of the result
  const double t = std::sqrt(-2.0 * std::log(pp));
  double z = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
  for (int i = 0; i < 4; ++i) {
    const double err = 0.5 * std::erfc(z * M_SQRT1_2) - pp;  // Q(z) - pp
    z += err / normal_pdf(z);
  }
  return lower ? -z : z;
}

}  // namespace tailfuse
