#pragma once

// Undirected weighted graphs and their Laplacians.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sddkit/error.hpp"
#include "sddkit/vector_ops.hpp"

namespace sddkit {

using Vertex = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();
inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double w = 0.0;

  Vertex other(Vertex x) const noexcept { return x == u ? v : u; }

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Simple undirected graph with strictly positive weights.
///
/// Edges are stored canonically: u < v, sorted by (u, v), with parallel
/// input edges merged by summing their weights. Immutable after
/// construction.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  WeightedGraph(std::size_t n, std::vector<Edge> edges) : n_(n) {
    if (n > std::numeric_limits<Vertex>::max() - 1)
      throw ValidationError("vertex count too large");
    for (Edge& e : edges) {
      if (e.u >= n || e.v >= n) {
        throw ValidationError("edge (" + std::to_string(e.u) + ", " +
                              std::to_string(e.v) + ") out of range for n = " +
                              std::to_string(n));
      }
      if (e.u == e.v)
        throw ValidationError("self-loop at vertex " + std::to_string(e.u));
      if (!(e.w > 0.0) || !std::isfinite(e.w)) {
        throw ValidationError("edge (" + std::to_string(e.u) + ", " +
                              std::to_string(e.v) +
                              ") has non-positive or non-finite weight");
      }
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    edges_.reserve(edges.size());
    for (const Edge& e : edges) {
      if (!edges_.empty() && edges_.back().u == e.u && edges_.back().v == e.v)
        edges_.back().w += e.w;
      else
        edges_.push_back(e);
    }
    if (edges_.size() > std::numeric_limits<EdgeId>::max() - 1)
      throw ValidationError("edge count too large");
    build_adjacency();
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  /// Ids of edges incident to x.
  std::span<const EdgeId> incident(Vertex x) const noexcept {
    return {incident_.data() + offsets_[x],
            incident_.data() + offsets_[x + 1]};
  }

  std::size_t degree(Vertex x) const noexcept {
    return offsets_[x + 1] - offsets_[x];
  }

  double weighted_degree(Vertex x) const noexcept {
    double s = 0.0;
    for (EdgeId e : incident(x)) s += edges_[e].w;
    return s;
  }

  double total_weight() const noexcept {
    double s = 0.0;
    for (const Edge& e : edges_) s += e.w;
    return s;
  }

  /// Edge id joining a and b, or kNoEdge.
  EdgeId find_edge(Vertex a, Vertex b) const noexcept {
    if (a > b) std::swap(a, b);
    const Vertex probe = degree(a) <= degree(b) ? a : b;
    for (EdgeId e : incident(probe))
      if (edges_[e].u == a && edges_[e].v == b) return e;
    return kNoEdge;
  }

  /// Copy with every weight multiplied by factor (> 0).
  WeightedGraph scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor))
      throw ValidationError("scale factor must be positive and finite");
    std::vector<Edge> out(edges_.begin(), edges_.end());
    for (Edge& e : out) e.w *= factor;
    return WeightedGraph(n_, std::move(out));
  }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  void build_adjacency() {
    offsets_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    incident_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId id = 0; id < edges_.size(); ++id) {
      incident_[fill[edges_[id].u]++] = id;
      incident_[fill[edges_[id].v]++] = id;
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<EdgeId> incident_;
};

/// y = L_G x
inline void laplacian_apply(const WeightedGraph& g, std::span<const double> x,
                            std::span<double> y) {
  require_same_size(g.num_vertices(), x.size(), "laplacian_apply (x)");
  require_same_size(g.num_vertices(), y.size(), "laplacian_apply (y)");
  std::fill(y.begin(), y.end(), 0.0);
  for (const Edge& e : g.edges()) {
    const double d = e.w * (x[e.u] - x[e.v]);
    y[e.u] += d;
    y[e.v] -= d;
  }
}

inline Vector laplacian_apply(const WeightedGraph& g, std::span<const double> x) {
  Vector y(g.num_vertices());
  laplacian_apply(g, x, y);
  return y;
}

/// x^T L_G x computed edge by edge.
inline double laplacian_quadratic_form(const WeightedGraph& g,
                                       std::span<const double> x) {
  require_same_size(g.num_vertices(), x.size(), "laplacian_quadratic_form");
  double s = 0.0;
  for (const Edge& e : g.edges()) {
    const double d = x[e.u] - x[e.v];
    s += e.w * d * d;
  }
  return s;
}

struct Components {
  std::vector<std::uint32_t> label;  // component index per vertex
  std::vector<std::size_t> sizes;
  std::size_t count() const noexcept { return sizes.size(); }
};

inline Components connected_components(const WeightedGraph& g) {
  const std::size_t n = g.num_vertices();
  Components c;
  c.label.assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<Vertex> stack;
  for (Vertex s = 0; s < n; ++s) {
    if (c.label[s] != std::numeric_limits<std::uint32_t>::max()) continue;
    const auto id = static_cast<std::uint32_t>(c.sizes.size());
    c.sizes.push_back(0);
    c.label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      ++c.sizes[id];
      for (EdgeId e : g.incident(x)) {
        const Vertex y = g.edge(e).other(x);
        if (c.label[y] == std::numeric_limits<std::uint32_t>::max()) {
          c.label[y] = id;
          stack.push_back(y);
        }
      }
    }
  }
  return c;
}

inline bool is_connected(const WeightedGraph& g) {
  return g.num_vertices() <= 1 || connected_components(g).count() == 1;
}

/// Throws DisconnectedGraphError listing component sizes.
inline void require_connected(const WeightedGraph& g) {
  if (g.num_vertices() == 0) throw ValidationError("graph has no vertices");
  Components c = connected_components(g);
  if (c.count() > 1) throw DisconnectedGraphError(std::move(c.sizes));
}

/// Induced subgraphs, one per connected component, with the vertex lists
/// that map local ids back to g.
struct ComponentSplit {
  std::vector<WeightedGraph> graphs;
  std::vector<std::vector<Vertex>> vertices;
};

inline ComponentSplit split_components(const WeightedGraph& g) {
  const Components c = connected_components(g);
  ComponentSplit out;
  out.vertices.resize(c.count());
  std::vector<Vertex> local(g.num_vertices());
  for (Vertex x = 0; x < g.num_vertices(); ++x) {
    local[x] = static_cast<Vertex>(out.vertices[c.label[x]].size());
    out.vertices[c.label[x]].push_back(x);
  }
  std::vector<std::vector<Edge>> edges(c.count());
  for (const Edge& e : g.edges())
    edges[c.label[e.u]].push_back({local[e.u], local[e.v], e.w});
  for (std::size_t k = 0; k < c.count(); ++k)
    out.graphs.emplace_back(out.vertices[k].size(), std::move(edges[k]));
  return out;
}

}  // namespace sddkit
