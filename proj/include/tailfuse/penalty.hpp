#pragma once

#include <span>
#include <vector>

namespace tailfuse {

struct ClusterGraph;

enum class WeightKind { uniform, adaptive, scad_deriv, mcp_deriv };

/// Edge-weight rule for the fused penalty. `a` and `lambda` drive the
/// folded-concave kinds: scad_deriv needs a > 2, mcp_deriv needs a > 1.
struct WeightSpec {
  WeightKind kind = WeightKind::uniform;
  double a = 3.7;
  double lambda = 1.0;

  static WeightSpec uniform() { return {WeightKind::uniform, 0.0, 0.0}; }
  static WeightSpec adaptive() { return {WeightKind::adaptive, 0.0, 0.0}; }
  static WeightSpec scad(double lambda, double a = 3.7) {
    return {WeightKind::scad_deriv, a, lambda};
  }
  static WeightSpec mcp(double lambda, double a = 3.0) { return {WeightKind::mcp_deriv, a, lambda}; }
};

/// Weight at gap t = |gamma_j - gamma_k| >= 0. The scad/mcp kinds vanish
/// for t >= a*lambda and approach 1 at t -> 0+; the scad middle branch is
/// normalized, (a*lambda - t)/((a-1)*lambda), so the function is continuous.
double weight(const WeightSpec& spec, double t);

/// One weight per edge from frozen cluster-wise shape estimates.
std::vector<double> edge_weights(const WeightSpec& spec, const ClusterGraph& g,
                                 std::span<const double> gamma_tilde);

}  // namespace tailfuse
