#include "tailfuse/penalty.hpp"

#include <cmath>
#include <stdexcept>

#include "tailfuse/graph.hpp"

namespace tailfuse {

namespace {
constexpr double kAdaptiveFloor = 1e-8;

void check_spec(const WeightSpec& spec) {
  switch (spec.kind) {
    case WeightKind::uniform:
    case WeightKind::adaptive:
      return;
    case WeightKind::scad_deriv:
      if (!(spec.a > 2.0) || !(spec.lambda > 0.0))
        throw std::invalid_argument("WeightSpec: scad needs a > 2 and lambda > 0");
      return;
    case WeightKind::mcp_deriv:
      if (!(spec.a > 1.0) || !(spec.lambda > 0.0))
        throw std::invalid_argument("WeightSpec: mcp needs a > 1 and lambda > 0");
      return;
  }
  throw std::invalid_argument("WeightSpec: unknown kind");
}

}  // namespace

double weight(const WeightSpec& spec, double t) {
  check_spec(spec);
  if (!(t >= 0.0)) throw std::invalid_argument("weight: need t >= 0");
  switch (spec.kind) {
    case WeightKind::uniform:
      return 1.0;
    case WeightKind::adaptive:
      return 1.0 / std::max(t, kAdaptiveFloor);
    case WeightKind::scad_deriv: {
      const double lam = spec.lambda, a = spec.a;
      if (t < lam) return 1.0;
      if (t < a * lam) return (a * lam - t) / ((a - 1.0) * lam);
      return 0.0;
    }
    case WeightKind::mcp_deriv:
      return std::max(0.0, 1.0 - t / (spec.a * spec.lambda));
  }
  return 0.0;  // unreachable
}

std::vector<double> edge_weights(const WeightSpec& spec, const ClusterGraph& g,
                                 std::span<const double> gamma_tilde) {
  if (static_cast<int>(gamma_tilde.size()) != g.num_vertices)
    throw std::invalid_argument("edge_weights: gamma_tilde size mismatch");
  std::vector<double> w(g.edges.size());
  for (std::size_t m = 0; m < g.edges.size(); ++m) {
    const auto [j, k] = g.edges[m];
    w[m] = weight(spec, std::abs(gamma_tilde[j] - gamma_tilde[k]));
  }
  return w;
}

}  // namespace tailfuse
