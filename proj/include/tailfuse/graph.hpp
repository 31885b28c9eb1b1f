#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace tailfuse {

class Matrix;

/// Undirected cluster graph on vertices 0..J-1 with per-edge penalty
/// weights. Edges are stored (low, high), deduplicated and sorted, which
/// fixes the incidence orientation: +1 on the lower index, -1 on the higher.
struct ClusterGraph {
  int num_vertices = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> weights;  // one per edge, default 1

  static ClusterGraph from_edges(int num_vertices, std::vector<std::pair<int, int>> edges,
                                 std::vector<double> weights = {});

  int num_edges() const { return static_cast<int>(edges.size()); }
};

/// D * gamma for the oriented incidence matrix D: entry m = gamma_j - gamma_k
/// for edge m = (j, k) with j < k.
std::vector<double> apply_incidence(const ClusterGraph& g, std::span<const double> gamma);

/// D^T * v, length J; the adjoint used by dual residuals and gradients.
std::vector<double> apply_incidence_transpose(const ClusterGraph& g, std::span<const double> v);

/// Connected components over the active edge subset (all edges when the mask
/// is empty). Components are listed by smallest member, members ascending.
std::vector<std::vector<int>> connected_components(const ClusterGraph& g,
                                                   std::span<const std::uint8_t> active_edges = {});

/// Per-vertex component label of the same partition.
std::vector<int> component_ids(const ClusterGraph& g,
                               std::span<const std::uint8_t> active_edges = {});

/// Edge (j,k) iff chi_hat(j,k) > cutoff, cutoff in (0,1).
ClusterGraph build_graph_chi(const Matrix& chi_hat, double cutoff);

/// Edge (j,k) iff |gamma_tilde_j - gamma_tilde_k| < delta.
ClusterGraph build_graph_homogeneity(std::span<const double> gamma_tilde, double delta);

/// Budgeted variant: delta is the largest pairwise gap keeping at most
/// `edge_budget` edges; the gap search is a sort of the pairwise distances.
ClusterGraph build_graph_homogeneity_budget(std::span<const double> gamma_tilde, long edge_budget);

/// Band graph: edges (j, j+d) for every offset d. With common_range the
/// base vertex stops at J - max(offset) for all offsets, matching designs
/// that slide one window of neighbors.
ClusterGraph build_graph_band(int num_vertices, std::span<const int> offsets,
                              bool common_range = false);

/// Text edge list, one `j,k[,weight]` per line, 1-based vertex ids.
void save_edge_list(std::ostream& out, const ClusterGraph& g);
ClusterGraph load_edge_list(std::istream& in, int num_vertices);

}  // namespace tailfuse
