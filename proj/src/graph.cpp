#include "tailfuse/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "tailfuse/math.hpp"
#include "tailfuse/util.hpp"

namespace tailfuse {

namespace {

struct UnionFind {
  std::vector<int> parent, rank_;

  explicit UnionFind(int n) : parent(n), rank_(n, 0) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }

  void merge(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }
};

}  // namespace

ClusterGraph ClusterGraph::from_edges(int num_vertices, std::vector<std::pair<int, int>> edges,
                                      std::vector<double> weights) {
  if (num_vertices <= 0) throw std::invalid_argument("ClusterGraph: need at least one vertex");
  if (!weights.empty() && weights.size() != edges.size())
    throw std::invalid_argument("ClusterGraph: one weight per edge required");

  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  for (auto& [j, k] : edges) {
    if (j == k) throw std::invalid_argument("ClusterGraph: self-loop");
    if (j < 0 || k < 0 || j >= num_vertices || k >= num_vertices)
      throw std::invalid_argument("ClusterGraph: vertex index out of range");
    if (j > k) std::swap(j, k);
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });

  ClusterGraph g;
  g.num_vertices = num_vertices;
  for (std::size_t i : order) {
    if (!g.edges.empty() && g.edges.back() == edges[i])
      throw std::invalid_argument("ClusterGraph: duplicate edge");
    g.edges.push_back(edges[i]);
    g.weights.push_back(weights.empty() ? 1.0 : weights[i]);
  }
  return g;
}

std::vector<double> apply_incidence(const ClusterGraph& g, std::span<const double> gamma) {
  if (static_cast<int>(gamma.size()) != g.num_vertices)
    throw std::invalid_argument("apply_incidence: gamma length mismatch");
  std::vector<double> out(g.edges.size());
  for (std::size_t m = 0; m < g.edges.size(); ++m)
    out[m] = gamma[g.edges[m].first] - gamma[g.edges[m].second];
  return out;
}

std::vector<double> apply_incidence_transpose(const ClusterGraph& g, std::span<const double> v) {
  if (v.size() != g.edges.size())
    throw std::invalid_argument("apply_incidence_transpose: edge vector length mismatch");
  std::vector<double> out(g.num_vertices, 0.0);
  for (std::size_t m = 0; m < g.edges.size(); ++m) {
    out[g.edges[m].first] += v[m];
    out[g.edges[m].second] -= v[m];
  }
  return out;
}

std::vector<int> component_ids(const ClusterGraph& g,
                               std::span<const std::uint8_t> active_edges) {
  if (!active_edges.empty() && active_edges.size() != g.edges.size())
    throw std::invalid_argument("connected_components: active mask length mismatch");
  UnionFind uf(g.num_vertices);
  for (std::size_t m = 0; m < g.edges.size(); ++m) {
    if (active_edges.empty() || active_edges[m]) uf.merge(g.edges[m].first, g.edges[m].second);
  }
  // relabel roots as 0,1,... in order of first appearance
  std::vector<int> label(g.num_vertices, -1);
  std::vector<int> ids(g.num_vertices);
  int next = 0;
  for (int v = 0; v < g.num_vertices; ++v) {
    const int r = uf.find(v);
    if (label[r] < 0) label[r] = next++;
    ids[v] = label[r];
  }
  return ids;
}

std::vector<std::vector<int>> connected_components(const ClusterGraph& g,
                                                   std::span<const std::uint8_t> active_edges) {
  const std::vector<int> ids = component_ids(g, active_edges);
  const int count = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
  std::vector<std::vector<int>> parts(count);
  for (int v = 0; v < g.num_vertices; ++v) parts[ids[v]].push_back(v);
  return parts;
}

ClusterGraph build_graph_chi(const Matrix& chi_hat, double cutoff) {
  if (chi_hat.rows() != chi_hat.cols() || chi_hat.rows() == 0)
    throw std::invalid_argument("build_graph_chi: square matrix required");
  if (!(cutoff > 0.0 && cutoff < 1.0))
    throw std::invalid_argument("build_graph_chi: cutoff must lie in (0,1)");
  const int J = static_cast<int>(chi_hat.rows());
  std::vector<std::pair<int, int>> edges;
  for (int j = 0; j < J; ++j)
    for (int k = j + 1; k < J; ++k)
      if (chi_hat(j, k) > cutoff) edges.emplace_back(j, k);
  return ClusterGraph::from_edges(J, std::move(edges));
}

ClusterGraph build_graph_homogeneity(std::span<const double> gamma_tilde, double delta) {
  const int J = static_cast<int>(gamma_tilde.size());
  if (J == 0) throw std::invalid_argument("build_graph_homogeneity: empty input");
  if (!(delta > 0.0)) throw std::invalid_argument("build_graph_homogeneity: delta must be > 0");
  std::vector<std::pair<int, int>> edges;
  for (int j = 0; j < J; ++j)
    for (int k = j + 1; k < J; ++k)
      if (std::abs(gamma_tilde[j] - gamma_tilde[k]) < delta) edges.emplace_back(j, k);
  return ClusterGraph::from_edges(J, std::move(edges));
}

ClusterGraph build_graph_homogeneity_budget(std::span<const double> gamma_tilde,
                                            long edge_budget) {
  const int J = static_cast<int>(gamma_tilde.size());
  if (J == 0) throw std::invalid_argument("build_graph_homogeneity_budget: empty input");
  if (edge_budget <= 0)
    throw std::invalid_argument("build_graph_homogeneity_budget: budget must be positive");
  // equivalent to picking the largest delta that keeps the edge count within
  // budget, except that exact ties at the boundary gap are split
  // deterministically by vertex order
  struct Gap {
    double value;
    int j, k;
  };
  std::vector<Gap> gaps;
  gaps.reserve(static_cast<std::size_t>(J) * (J - 1) / 2);
  for (int j = 0; j < J; ++j)
    for (int k = j + 1; k < J; ++k)
      gaps.push_back({std::abs(gamma_tilde[j] - gamma_tilde[k]), j, k});
  std::sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) {
    return a.value != b.value ? a.value < b.value : std::tie(a.j, a.k) < std::tie(b.j, b.k);
  });
  const std::size_t take = std::min<std::size_t>(gaps.size(), static_cast<std::size_t>(edge_budget));
  std::vector<std::pair<int, int>> edges;
  edges.reserve(take);
  for (std::size_t i = 0; i < take; ++i) edges.emplace_back(gaps[i].j, gaps[i].k);
  return ClusterGraph::from_edges(J, std::move(edges));
}

ClusterGraph build_graph_band(int num_vertices, std::span<const int> offsets, bool common_range) {
  if (offsets.empty()) throw std::invalid_argument("build_graph_band: offsets must be nonempty");
  int max_offset = 0;
  for (int d : offsets) {
    if (d <= 0) throw std::invalid_argument("build_graph_band: offsets must be positive");
    max_offset = std::max(max_offset, d);
  }
  std::vector<std::pair<int, int>> edges;
  for (int d : offsets) {
    const int last = common_range ? num_vertices - max_offset : num_vertices - d;
    for (int j = 0; j < last; ++j) edges.emplace_back(j, j + d);
  }
  return ClusterGraph::from_edges(num_vertices, std::move(edges));
}

void save_edge_list(std::ostream& out, const ClusterGraph& g) {
  for (std::size_t m = 0; m < g.edges.size(); ++m) {
    out << g.edges[m].first + 1 << ',' << g.edges[m].second + 1;
    if (g.weights[m] != 1.0) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", g.weights[m]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

ClusterGraph load_edge_list(std::istream& in, int num_vertices) {
  std::vector<std::pair<int, int>> edges;
  std::vector<double> weights;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int j = 0, k = 0;
    double w = 1.0;
    if (!(ss >> j >> k)) throw std::invalid_argument("load_edge_list: malformed line: " + line);
    ss >> w;
    edges.emplace_back(j - 1, k - 1);
    weights.push_back(w);
  }
  return ClusterGraph::from_edges(num_vertices, std::move(edges), std::move(weights));
}

}  // namespace tailfuse
