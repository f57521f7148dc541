#pragma once

// Low-stretch spanning trees and exact per-edge stretch via offline LCA.
//
// Edge lengths are resistances 1/w. The stretch of e = (u, v) over a tree T
// is w_e times the tree-path resistance between u and v.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sddkit/error.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/union_find.hpp"

namespace sddkit {

/// Rooted spanning tree of a host graph. The root is its own parent.
/// Tree edge weights are host weights times scale.
struct SpanningTree {
  Vertex root = 0;
  std::vector<Vertex> parent;
  std::vector<EdgeId> parent_edge;  // kNoEdge at the root
  double scale = 1.0;

  std::size_t num_vertices() const noexcept { return parent.size(); }

  std::vector<bool> tree_edge_flags(std::size_t num_edges) const {
    std::vector<bool> flags(num_edges, false);
    for (EdgeId e : parent_edge)
      if (e != kNoEdge) flags[e] = true;
    return flags;
  }

  SpanningTree scaled(double kappa) const {
    if (!(kappa >= 1.0) || !std::isfinite(kappa))
      throw ValidationError("tree scale must be >= 1, got " + std::to_string(kappa));
    SpanningTree t = *this;
    t.scale *= kappa;
    return t;
  }
};

/// Checks that t is a spanning tree of g (n-1 host edges, acyclic, rooted).
inline void validate_tree(const WeightedGraph& g, const SpanningTree& t) {
  const std::size_t n = g.num_vertices();
  if (t.parent.size() != n || t.parent_edge.size() != n)
    throw DimensionError("spanning tree size does not match graph");
  if (t.root >= n || t.parent[t.root] != t.root || t.parent_edge[t.root] != kNoEdge)
    throw ValidationError("spanning tree root is malformed");
  if (!(t.scale >= 1.0)) throw ValidationError("spanning tree scale must be >= 1");
  UnionFind uf(n);
  for (Vertex x = 0; x < n; ++x) {
    if (x == t.root) continue;
    const EdgeId e = t.parent_edge[x];
    if (e >= g.num_edges()) throw ValidationError("tree edge not in host graph");
    const Edge& ed = g.edge(e);
    if (!((ed.u == x && ed.v == t.parent[x]) || (ed.v == x && ed.u == t.parent[x])))
      throw ValidationError("tree parent edge does not join vertex and parent");
    if (uf.find(ed.u) == uf.find(ed.v)) throw ValidationError("tree contains a cycle");
    uf.unite(ed.u, ed.v);
  }
}

/// Roots the tree given by edge ids at root. Throws unless the edges form
/// a spanning tree.
inline SpanningTree root_tree(const WeightedGraph& g, std::span<const EdgeId> tree_edges,
                              Vertex root) {
  const std::size_t n = g.num_vertices();
  if (tree_edges.size() + 1 != n)
    throw ValidationError("a spanning tree needs n - 1 = " + std::to_string(n - 1) +
                          " edges, got " + std::to_string(tree_edges.size()));
  std::vector<std::vector<EdgeId>> adj(n);
  for (EdgeId e : tree_edges) {
    adj[g.edge(e).u].push_back(e);
    adj[g.edge(e).v].push_back(e);
  }
  SpanningTree t;
  t.root = root;
  t.parent.assign(n, kNoVertex);
  t.parent_edge.assign(n, kNoEdge);
  t.parent[root] = root;
  std::vector<Vertex> queue{root};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex x = queue[head];
    for (EdgeId e : adj[x]) {
      const Vertex y = g.edge(e).other(x);
      if (t.parent[y] != kNoVertex) continue;
      t.parent[y] = x;
      t.parent_edge[y] = e;
      queue.push_back(y);
    }
  }
  if (queue.size() != n) throw ValidationError("tree edges do not span the graph");
  return t;
}

/// Vertices in BFS order from the root (parents before children).
inline std::vector<Vertex> tree_order(const SpanningTree& t) {
  const std::size_t n = t.num_vertices();
  std::vector<std::size_t> offsets(n + 1, 0);
  for (Vertex x = 0; x < n; ++x)
    if (x != t.root) ++offsets[t.parent[x] + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  std::vector<Vertex> children(n > 0 ? n - 1 : 0);
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  for (Vertex x = 0; x < n; ++x)
    if (x != t.root) children[fill[t.parent[x]]++] = x;
  std::vector<Vertex> order{t.root};
  order.reserve(n);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const Vertex x = order[head];
    for (std::size_t k = offsets[x]; k < offsets[x + 1]; ++k) order.push_back(children[k]);
  }
  if (order.size() != n) throw ValidationError("parent array does not describe a tree");
  return order;
}

struct StretchTable {
  std::vector<double> stretch;  // per host edge
  std::vector<bool> is_tree;
  double total_stretch = 0.0;
  double tree_scale = 1.0;

  /// Sum of stretch over non-tree edges.
  double off_tree_stretch() const {
    double s = 0.0;
    for (std::size_t e = 0; e < stretch.size(); ++e)
      if (!is_tree[e]) s += stretch[e];
    return s;
  }
};

namespace detail {

/// Double-length accumulator: value = hi + lo.
struct Compensated {
  double hi = 0.0;
  double lo = 0.0;

  Compensated plus(double x) const {
    const double s = hi + x;
    const double bp = s - hi;
    const double err = (hi - (s - bp)) + (x - bp);
    return {s, lo + err};
  }
};

}  // namespace detail

/// Exact stretch of every host edge over t (at t.scale), computed from
/// root-prefix resistances and Tarjan's offline LCA. Tree edges get 1.
inline StretchTable compute_stretch(const WeightedGraph& g, const SpanningTree& t) {
  validate_tree(g, t);
  const std::size_t n = g.num_vertices();
  const std::size_t m = g.num_edges();
  StretchTable table;
  table.tree_scale = t.scale;
  table.is_tree = t.tree_edge_flags(m);
  table.stretch.assign(m, 1.0);

  // root-to-vertex resistance prefixes
  const std::vector<Vertex> order = tree_order(t);
  std::vector<detail::Compensated> res(n);
  for (Vertex x : order) {
    if (x == t.root) continue;
    res[x] = res[t.parent[x]].plus(1.0 / (t.scale * g.edge(t.parent_edge[x]).w));
  }

  // children in CSR form for the iterative DFS
  std::vector<std::size_t> child_off(n + 1, 0);
  for (Vertex x = 0; x < n; ++x)
    if (x != t.root) ++child_off[t.parent[x] + 1];
  for (std::size_t i = 0; i < n; ++i) child_off[i + 1] += child_off[i];
  std::vector<Vertex> children(n > 0 ? n - 1 : 0);
  {
    std::vector<std::size_t> fill(child_off.begin(), child_off.end() - 1);
    for (Vertex x : order)
      if (x != t.root) children[fill[t.parent[x]]++] = x;
  }

  UnionFind uf(n);
  std::vector<Vertex> ancestor(n);
  std::vector<bool> finished(n, false);
  std::vector<std::size_t> next_child(n);
  std::vector<Vertex> stack{t.root};
  ancestor[t.root] = t.root;
  next_child[t.root] = child_off[t.root];
  while (!stack.empty()) {
    const Vertex x = stack.back();
    if (next_child[x] < child_off[x + 1]) {
      const Vertex c = children[next_child[x]++];
      ancestor[c] = c;
      next_child[c] = child_off[c];
      stack.push_back(c);
      continue;
    }
    // x is complete: answer its queries against finished vertices
    finished[x] = true;
    for (EdgeId e : g.incident(x)) {
      if (table.is_tree[e]) continue;
      const Vertex y = g.edge(e).other(x);
      if (!finished[y] || (y == x)) continue;
      const Vertex lca = ancestor[uf.find(y)];
      const auto& ru = res[x];
      const auto& rv = res[y];
      const auto& rl = res[lca];
      const double path = ((ru.hi - rl.hi) + (rv.hi - rl.hi)) + ((ru.lo - rl.lo) + (rv.lo - rl.lo));
      table.stretch[e] = g.edge(e).w * path;
    }
    stack.pop_back();
    if (!stack.empty()) {
      const Vertex p = stack.back();
      ancestor[uf.unite(p, x)] = p;
    }
  }
  double total = 0.0;
  for (double s : table.stretch) total += s;
  table.total_stretch = total;
  return table;
}

/// Sampling weights for the incremental sparsifier: 1 on tree edges and
/// stretch / kappa elsewhere, where stretch is measured over the unscaled
/// tree.
inline std::vector<double> scaled_probabilities(const StretchTable& table, double kappa) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa))
    throw ValidationError("kappa must be >= 1, got " + std::to_string(kappa));
  std::vector<double> p(table.stretch.size());
  for (std::size_t e = 0; e < p.size(); ++e)
    p[e] = table.is_tree[e] ? 1.0 : table.stretch[e] * table.tree_scale / kappa;
  return p;
}

namespace detail {

struct ShortestPaths {
  std::vector<double> dist;
  std::vector<EdgeId> pred_edge;
  std::vector<Vertex> order;  // settled order
};

/// Dijkstra with resistance lengths from source over vertices accepted by
/// the filter, stopping past radius. Ties settle the lowest vertex id
/// first. dist must be +inf on every allowed vertex.
template <typename Filter>
void dijkstra(const WeightedGraph& g, Vertex source, Filter&& allowed,
              std::vector<double>& dist, std::vector<EdgeId>& pred, std::vector<Vertex>& order,
              double radius = std::numeric_limits<double>::infinity()) {
  using Item = std::pair<double, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  pred[source] = kNoEdge;
  heap.push({0.0, source});
  order.clear();
  while (!heap.empty()) {
    const auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    if (d > radius) break;
    order.push_back(x);
    for (EdgeId e : g.incident(x)) {
      const Vertex y = g.edge(e).other(x);
      if (!allowed(y)) continue;
      const double nd = d + 1.0 / g.edge(e).w;
      if (nd < dist[y]) {
        dist[y] = nd;
        pred[y] = e;
        heap.push({nd, y});
      }
    }
  }
}

inline ShortestPaths shortest_path_tree(const WeightedGraph& g, Vertex source) {
  ShortestPaths sp;
  sp.dist.assign(g.num_vertices(), std::numeric_limits<double>::infinity());
  sp.pred_edge.assign(g.num_vertices(), kNoEdge);
  dijkstra(g, source, [](Vertex) { return true; }, sp.dist, sp.pred_edge, sp.order);
  return sp;
}

/// Approximate graph center from two sweeps of Dijkstra.
inline Vertex pseudo_center(const WeightedGraph& g) {
  auto farthest = [&](const ShortestPaths& sp) {
    Vertex best = 0;
    for (Vertex x = 0; x < g.num_vertices(); ++x)
      if (sp.dist[x] > sp.dist[best]) best = x;
    return best;
  };
  const ShortestPaths s0 = shortest_path_tree(g, 0);
  const Vertex a = farthest(s0);
  const ShortestPaths sa = shortest_path_tree(g, a);
  const Vertex b = farthest(sa);
  const ShortestPaths sb = shortest_path_tree(g, b);
  Vertex best = 0;
  double best_ecc = std::numeric_limits<double>::infinity();
  for (Vertex x = 0; x < g.num_vertices(); ++x) {
    const double ecc = std::max(sa.dist[x], sb.dist[x]);
    if (ecc < best_ecc) {
      best_ecc = ecc;
      best = x;
    }
  }
  return best;
}

/// Recursive star decomposition: each cluster is split into a ball around
/// its center plus cones grown from the ball's boundary, each cone joined to
/// the ball by one bridge edge, and every piece is decomposed again.
class StarDecomposition {
 public:
  StarDecomposition(const WeightedGraph& g, double cone_fraction)
      : g_(g),
        cone_fraction_(cone_fraction),
        tag_(g.num_vertices(), 0),
        dist_(g.num_vertices(), std::numeric_limits<double>::infinity()),
        cone_dist_(g.num_vertices(), std::numeric_limits<double>::infinity()),
        pred_(g.num_vertices(), kNoEdge),
        state_(g.num_vertices(), kFree) {}

  std::vector<EdgeId> run(Vertex center) {
    std::vector<Vertex> all(g_.num_vertices());
    for (Vertex x = 0; x < all.size(); ++x) all[x] = x;
    work_.push_back({std::move(all), center});
    while (!work_.empty()) {
      Cluster c = std::move(work_.back());
      work_.pop_back();
      split(c);
    }
    return std::move(tree_edges_);
  }

 private:
  struct Cluster {
    std::vector<Vertex> vertices;
    Vertex center;
  };

  static constexpr std::uint8_t kFree = 0, kBall = 1, kTaken = 2;
  static constexpr std::size_t kBaseSize = 3;

  void split(const Cluster& c) {
    const std::size_t size = c.vertices.size();
    if (size <= 1) return;
    const std::uint32_t tag = ++current_tag_;
    for (Vertex x : c.vertices) {
      tag_[x] = tag;
      dist_[x] = std::numeric_limits<double>::infinity();
      cone_dist_[x] = std::numeric_limits<double>::infinity();
      pred_[x] = kNoEdge;
      state_[x] = kFree;
    }
    auto in_cluster = [&](Vertex y) { return tag_[y] == tag; };
    std::vector<Vertex> order;
    dijkstra(g_, c.center, in_cluster, dist_, pred_, order);
    if (order.size() != size) throw ValidationError("star decomposition: cluster is disconnected");
    if (size <= kBaseSize) {
      for (Vertex x : order)
        if (x != c.center) tree_edges_.push_back(pred_[x]);
      return;
    }
    const double rho = dist_[order.back()];

    // ball: cheapest cut among radii in [rho/3, 2rho/3]
    const std::size_t ball_size = cheapest_cut(order, dist_, rho / 3.0, 2.0 * rho / 3.0, in_cluster, size - 1);
    std::vector<Vertex> ball(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(ball_size));
    for (Vertex x : ball) state_[x] = kBall;

    // shell: free vertices adjacent to the ball, nearest first
    std::vector<Vertex> shell;
    for (Vertex x : order) {
      if (state_[x] != kFree) continue;
      for (EdgeId e : g_.incident(x)) {
        const Vertex y = g_.edge(e).other(x);
        if (in_cluster(y) && state_[y] == kBall) {
          shell.push_back(x);
          break;
        }
      }
    }

    const double delta = cone_fraction_ * rho;
    std::vector<Vertex> cone_order, touched;
    for (Vertex x : shell) {
      if (state_[x] != kFree) continue;
      auto cone_ok = [&](Vertex y) { return in_cluster(y) && state_[y] == kFree; };
      grow_cone(x, cone_ok, delta, cone_order, touched);
      const std::size_t k =
          cheapest_cut(cone_order, cone_dist_, 0.0, delta, cone_ok, cone_order.size());
      std::vector<Vertex> cone(cone_order.begin(), cone_order.begin() + static_cast<std::ptrdiff_t>(k));
      for (Vertex y : cone) state_[y] = kTaken;
      for (Vertex y : touched) cone_dist_[y] = std::numeric_limits<double>::infinity();
      tree_edges_.push_back(bridge(x, in_cluster));
      work_.push_back({std::move(cone), x});
    }
    // anything the cones missed (floating-point ties) hangs off its SPT parent
    for (Vertex x : order) {
      if (state_[x] != kFree) continue;
      state_[x] = kTaken;
      tree_edges_.push_back(pred_[x]);
    }
    work_.push_back({std::move(ball), c.center});
  }

  /// Ball-side edge into x that is shortest from the center.
  template <typename InCluster>
  EdgeId bridge(Vertex x, InCluster&& in_cluster) const {
    EdgeId best = kNoEdge;
    double best_d = std::numeric_limits<double>::infinity();
    for (EdgeId e : g_.incident(x)) {
      const Vertex y = g_.edge(e).other(x);
      if (!in_cluster(y) || state_[y] != kBall) continue;
      const double d = dist_[y] + 1.0 / g_.edge(e).w;
      if (d < best_d) {
        best_d = d;
        best = e;
      }
    }
    return best;
  }

  /// Dijkstra from x under reduced costs dist[a] + len(a, b) - dist[b], so
  /// edges on shortest paths from the cluster center are free. Settled
  /// vertices go to order; every vertex given a tentative distance goes to
  /// touched.
  template <typename Allowed>
  void grow_cone(Vertex x, Allowed&& allowed, double radius, std::vector<Vertex>& order,
                 std::vector<Vertex>& touched) {
    using Item = std::pair<double, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    order.clear();
    touched.assign(1, x);
    cone_dist_[x] = 0.0;
    heap.push({0.0, x});
    while (!heap.empty()) {
      const auto [d, a] = heap.top();
      heap.pop();
      if (d > cone_dist_[a]) continue;
      if (d > radius) break;
      order.push_back(a);
      for (EdgeId e : g_.incident(a)) {
        const Vertex b = g_.edge(e).other(a);
        if (!allowed(b)) continue;
        const double reduced = std::max(0.0, dist_[a] + 1.0 / g_.edge(e).w - dist_[b]);
        const double nd = d + reduced;
        if (nd < cone_dist_[b]) {
          if (cone_dist_[b] == std::numeric_limits<double>::infinity()) touched.push_back(b);
          cone_dist_[b] = nd;
          heap.push({nd, b});
        }
      }
    }
  }

  /// Prefix length of order (sorted by key) whose boundary has the least
  /// cut weight, restricted to boundaries with key in [lo, hi] that fall
  /// between distinct keys. The result lies in [1, max_take].
  template <typename InScope>
  std::size_t cheapest_cut(const std::vector<Vertex>& order, const std::vector<double>& key,
                           double lo, double hi, InScope&& in_scope, std::size_t max_take) {
    if (order.size() <= 1) return order.size();
    std::vector<bool>& inside = scratch_inside_;
    if (inside.size() < g_.num_vertices()) inside.assign(g_.num_vertices(), false);
    double cut = 0.0;
    std::size_t best = 0;
    double best_cut = std::numeric_limits<double>::infinity();
    std::size_t fallback = 1;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Vertex x = order[k];
      inside[x] = true;
      for (EdgeId e : g_.incident(x)) {
        const Vertex y = g_.edge(e).other(x);
        if (!in_scope(y) && !inside[y]) continue;
        cut += inside[y] ? -g_.edge(e).w : g_.edge(e).w;
      }
      const double r = key[x];
      const bool boundary = k + 1 == order.size() || key[order[k + 1]] > r;
      if (!boundary) continue;
      if (r <= hi) fallback = k + 1;
      if (r >= lo && r <= hi && cut < best_cut) {
        best_cut = cut;
        best = k + 1;
      }
    }
    for (Vertex x : order) inside[x] = false;
    const std::size_t chosen = best > 0 ? best : fallback;
    return std::clamp<std::size_t>(chosen, 1, std::max<std::size_t>(max_take, 1));
  }

  const WeightedGraph& g_;
  double cone_fraction_;
  std::vector<std::uint32_t> tag_;
  std::vector<double> dist_;
  std::vector<double> cone_dist_;
  std::vector<EdgeId> pred_;
  std::vector<std::uint8_t> state_;
  std::vector<bool> scratch_inside_;
  std::uint32_t current_tag_ = 0;
  std::vector<Cluster> work_;
  std::vector<EdgeId> tree_edges_;
};

}  // namespace detail

enum class TreeConstruction { star_decomposition, shortest_path };

inline const char* to_string(TreeConstruction c) {
  return c == TreeConstruction::star_decomposition ? "star-decomposition" : "shortest-path";
}

struct LowStretchResult {
  SpanningTree tree;
  double total_stretch = 0.0;
  TreeConstruction construction = TreeConstruction::star_decomposition;
};

struct LowStretchOptions {
  /// Cone radius bound as a fraction of the cluster radius.
  double cone_fraction = 0.5;
};

/// Builds a star-decomposition tree and a shortest-path tree from the same
/// center and keeps the one with smaller total stretch.
inline LowStretchResult low_stretch_tree(const WeightedGraph& g, LowStretchOptions opts = {}) {
  require_connected(g);
  const std::size_t n = g.num_vertices();
  LowStretchResult best;
  if (n == 1) {
    best.tree.root = 0;
    best.tree.parent = {0};
    best.tree.parent_edge = {kNoEdge};
    return best;
  }
  const Vertex center = detail::pseudo_center(g);

  const detail::ShortestPaths sp = detail::shortest_path_tree(g, center);
  std::vector<EdgeId> spt_edges;
  spt_edges.reserve(n - 1);
  for (Vertex x = 0; x < n; ++x)
    if (x != center) spt_edges.push_back(sp.pred_edge[x]);
  SpanningTree spt = root_tree(g, spt_edges, center);
  const double spt_stretch = compute_stretch(g, spt).total_stretch;

  std::vector<EdgeId> star_edges = detail::StarDecomposition(g, opts.cone_fraction).run(center);
  SpanningTree star = root_tree(g, star_edges, center);
  const double star_stretch = compute_stretch(g, star).total_stretch;

  if (star_stretch <= spt_stretch) {
    best.tree = std::move(star);
    best.total_stretch = star_stretch;
    best.construction = TreeConstruction::star_decomposition;
  } else {
    best.tree = std::move(spt);
    best.total_stretch = spt_stretch;
    best.construction = TreeConstruction::shortest_path;
  }
  return best;
}

}  // namespace sddkit
