#pragma once

// Greedy elimination of degree-1 and degree-2 vertices, recorded as a
// partial Cholesky factor so that B x = c reduces to a Schur-complement
// system on the surviving vertices with O(n) extra work.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "sddkit/error.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/vector_ops.hpp"

namespace sddkit {

/// One eliminated vertex. Degree-1 pivots leave u2 = kNoVertex and w2 = 0.
struct Pivot {
  Vertex v = 0;
  Vertex u1 = kNoVertex;
  Vertex u2 = kNoVertex;
  double w1 = 0.0;
  double w2 = 0.0;

  bool degree_two() const noexcept { return u2 != kNoVertex; }
  /// Series weight w1 w2 / (w1 + w2) of the spliced edge.
  double merged_weight() const noexcept { return degree_two() ? w1 * w2 / (w1 + w2) : 0.0; }
};

struct EliminationFactor {
  std::size_t n = 0;                 // vertices of the factored graph
  std::vector<Pivot> steps;          // in elimination order
  std::vector<Vertex> survivors;     // reduced id -> original id, ascending
  std::vector<Vertex> survivor_map;  // original id -> reduced id or kNoVertex

  std::size_t num_eliminated() const noexcept { return steps.size(); }
  std::size_t num_survivors() const noexcept { return survivors.size(); }
};

struct EliminationResult {
  WeightedGraph reduced;
  EliminationFactor factor;
};

/// Removes degree-1 vertices and splices out degree-2 vertices until none
/// remain (or one vertex is left). Pivots come from a FIFO worklist seeded
/// with every vertex of degree <= 2 in ascending id; neighbours whose degree
/// drops to <= 2 are appended in ascending id.
inline EliminationResult greedy_elimination(const WeightedGraph& g) {
  require_connected(g);
  const std::size_t n = g.num_vertices();

  // working adjacency: neighbour -> weight, kept simple
  std::vector<std::vector<std::pair<Vertex, double>>> adj(n);
  for (const Edge& e : g.edges()) {
    adj[e.u].push_back({e.v, e.w});
    adj[e.v].push_back({e.u, e.w});
  }
  auto drop = [&](Vertex a, Vertex b) {
    auto& list = adj[a];
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (list[k].first == b) {
        list[k] = list.back();
        list.pop_back();
        return;
      }
    }
  };
  // returns true if an edge a-b already existed
  auto add_or_merge = [&](Vertex a, Vertex b, double w) {
    for (auto& [y, wy] : adj[a]) {
      if (y == b) {
        wy += w;
        for (auto& [z, wz] : adj[b])
          if (z == a) wz += w;
        return true;
      }
    }
    adj[a].push_back({b, w});
    adj[b].push_back({a, w});
    return false;
  };

  std::vector<bool> eliminated(n, false), queued(n, false);
  std::deque<Vertex> work;
  for (Vertex x = 0; x < n; ++x) {
    if (adj[x].size() <= 2) {
      work.push_back(x);
      queued[x] = true;
    }
  }
  std::size_t remaining = n;
  EliminationFactor f;
  f.n = n;
  auto enqueue = [&](Vertex a, Vertex b) {
    if (a > b && b != kNoVertex) std::swap(a, b);
    for (Vertex x : {a, b}) {
      if (x == kNoVertex || queued[x] || eliminated[x] || adj[x].size() > 2) continue;
      queued[x] = true;
      work.push_back(x);
    }
  };

  while (!work.empty() && remaining > 1) {
    const Vertex v = work.front();
    work.pop_front();
    queued[v] = false;
    if (eliminated[v]) continue;
    const std::size_t deg = adj[v].size();
    if (deg == 0 || deg > 2) continue;
    Pivot p;
    p.v = v;
    if (deg == 1) {
      p.u1 = adj[v][0].first;
      p.w1 = adj[v][0].second;
      drop(p.u1, v);
      enqueue(p.u1, kNoVertex);
    } else {
      auto a = adj[v][0], b = adj[v][1];
      if (a.first > b.first) std::swap(a, b);
      p.u1 = a.first;
      p.w1 = a.second;
      p.u2 = b.first;
      p.w2 = b.second;
      drop(p.u1, v);
      drop(p.u2, v);
      add_or_merge(p.u1, p.u2, p.merged_weight());
      enqueue(p.u1, p.u2);
    }
    adj[v].clear();
    eliminated[v] = true;
    --remaining;
    f.steps.push_back(p);
  }

  f.survivor_map.assign(n, kNoVertex);
  for (Vertex x = 0; x < n; ++x) {
    if (eliminated[x]) continue;
    f.survivor_map[x] = static_cast<Vertex>(f.survivors.size());
    f.survivors.push_back(x);
  }
  std::vector<Edge> edges;
  for (Vertex x : f.survivors)
    for (const auto& [y, w] : adj[x])
      if (x < y) edges.push_back({f.survivor_map[x], f.survivor_map[y], w});
  EliminationResult res;
  res.reduced = WeightedGraph(f.survivors.size(), std::move(edges));
  res.factor = std::move(f);
  return res;
}

struct ForwardResult {
  Vector top;     // right-hand side at each pivot, in step order
  Vector bottom;  // Schur-complement right-hand side on survivors
};

/// Forward substitution (L^{-1} c): pushes the charge of every eliminated
/// vertex onto its neighbours in pivot order.
inline ForwardResult factor_forward(const EliminationFactor& f, std::span<const double> c) {
  require_same_size(f.n, c.size(), "factor_forward");
  Vector work(c.begin(), c.end());
  ForwardResult out;
  out.top.resize(f.steps.size());
  for (std::size_t k = 0; k < f.steps.size(); ++k) {
    const Pivot& p = f.steps[k];
    const double cv = work[p.v];
    out.top[k] = cv;
    if (p.degree_two()) {
      const double total = p.w1 + p.w2;
      work[p.u1] += p.w1 / total * cv;
      work[p.u2] += p.w2 / total * cv;
    } else {
      work[p.u1] += cv;
    }
  }
  out.bottom.resize(f.survivors.size());
  for (std::size_t r = 0; r < f.survivors.size(); ++r) out.bottom[r] = work[f.survivors[r]];
  return out;
}

/// Back substitution (L^{-T}): recovers eliminated coordinates in reverse
/// pivot order from the survivors' solution.
inline Vector factor_backward(const EliminationFactor& f, std::span<const double> top,
                              std::span<const double> x_bottom) {
  require_same_size(f.steps.size(), top.size(), "factor_backward (top)");
  require_same_size(f.survivors.size(), x_bottom.size(), "factor_backward (bottom)");
  Vector x(f.n, 0.0);
  for (std::size_t r = 0; r < f.survivors.size(); ++r) x[f.survivors[r]] = x_bottom[r];
  for (std::size_t k = f.steps.size(); k-- > 0;) {
    const Pivot& p = f.steps[k];
    if (p.degree_two())
      x[p.v] = (p.w1 * x[p.u1] + p.w2 * x[p.u2] + top[k]) / (p.w1 + p.w2);
    else
      x[p.v] = x[p.u1] + top[k] / p.w1;
  }
  return x;
}

}  // namespace sddkit
