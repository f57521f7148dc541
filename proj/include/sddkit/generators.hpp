#pragma once

// Deterministic graph families for tests and benchmarks.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "sddkit/error.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/rng.hpp"

namespace sddkit::gen {

inline WeightedGraph path(std::size_t n, double w = 1.0) {
  if (n < 1) throw ValidationError("path: n must be >= 1");
  std::vector<Edge> edges;
  for (Vertex i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, w});
  return WeightedGraph(n, std::move(edges));
}

inline WeightedGraph cycle(std::size_t n, double w = 1.0) {
  if (n < 3) throw ValidationError("cycle: n must be >= 3");
  std::vector<Edge> edges;
  for (Vertex i = 0; i < n; ++i)
    edges.push_back({i, static_cast<Vertex>((i + 1) % n), w});
  return WeightedGraph(n, std::move(edges));
}

/// rows x cols lattice, vertex (r, c) has id r * cols + c.
inline WeightedGraph grid2d(std::size_t rows, std::size_t cols, double w = 1.0) {
  if (rows < 1 || cols < 1) throw ValidationError("grid2d: sizes must be >= 1");
  std::vector<Edge> edges;
  edges.reserve(2 * rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto id = static_cast<Vertex>(r * cols + c);
      if (c + 1 < cols) edges.push_back({id, id + 1, w});
      if (r + 1 < rows) edges.push_back({id, static_cast<Vertex>(id + cols), w});
    }
  }
  return WeightedGraph(rows * cols, std::move(edges));
}

inline WeightedGraph complete(std::size_t n, double w = 1.0) {
  if (n < 1) throw ValidationError("complete: n must be >= 1");
  std::vector<Edge> edges;
  for (Vertex i = 0; i < n; ++i)
    for (Vertex j = i + 1; j < n; ++j) edges.push_back({i, j, w});
  return WeightedGraph(n, std::move(edges));
}

/// Vertex 0 joined to leaves 1..leaves.
inline WeightedGraph star(std::size_t leaves, double w = 1.0) {
  std::vector<Edge> edges;
  for (Vertex i = 1; i <= leaves; ++i) edges.push_back({0, i, w});
  return WeightedGraph(leaves + 1, std::move(edges));
}

/// Connected random graph with exactly m distinct edges.
///
/// A uniformly random recursive tree guarantees connectivity; the remaining
/// m - (n - 1) edges are distinct uniform pairs. With weight_spread > 1,
/// weights are log-uniform in [1, weight_spread]; otherwise all weights are 1.
inline WeightedGraph random(std::size_t n, std::size_t m, std::uint64_t seed,
                            double weight_spread = 1.0) {
  if (n < 1) throw ValidationError("random: n must be >= 1");
  if (m + 1 < n)
    throw ValidationError("random: m = " + std::to_string(m) +
                          " < n - 1 = " + std::to_string(n - 1));
  const double max_m = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (static_cast<double>(m) > max_m)
    throw ValidationError("random: m exceeds n(n-1)/2");
  if (!(weight_spread >= 1.0)) throw ValidationError("random: weight_spread must be >= 1");

  Rng rng(seed);
  auto weight = [&] {
    return weight_spread > 1.0 ? std::exp(rng.uniform() * std::log(weight_spread))
                               : 1.0;
  };
  std::vector<Vertex> order(n);
  for (Vertex i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  std::unordered_set<std::uint64_t> seen;
  auto key = [](Vertex a, Vertex b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
  };
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t i = 1; i < n; ++i) {
    const Vertex a = order[i];
    const Vertex b = order[rng.below(i)];
    seen.insert(key(a, b));
    edges.push_back({a, b, weight()});
  }
  while (edges.size() < m) {
    const auto a = static_cast<Vertex>(rng.below(n));
    const auto b = static_cast<Vertex>(rng.below(n));
    if (a == b || !seen.insert(key(a, b)).second) continue;
    edges.push_back({a, b, weight()});
  }
  return WeightedGraph(n, std::move(edges));
}

enum class Family { path, cycle, grid2d, random, complete, star };

inline Family parse_family(const std::string& name) {
  if (name == "path") return Family::path;
  if (name == "cycle") return Family::cycle;
  if (name == "grid2d" || name == "grid") return Family::grid2d;
  if (name == "random") return Family::random;
  if (name == "complete") return Family::complete;
  if (name == "star") return Family::star;
  throw ValidationError("unknown graph family '" + name + "'");
}

/// Family member with roughly target_edges edges; used by the bench driver.
inline WeightedGraph by_edge_count(Family family, std::size_t target_edges,
                                   std::uint64_t seed) {
  const auto m = std::max<std::size_t>(target_edges, 2);
  switch (family) {
    case Family::path:
      return path(m + 1);
    case Family::cycle:
      return cycle(std::max<std::size_t>(m, 3));
    case Family::grid2d: {
      // a k x k grid has 2k(k-1) edges
      const auto k = static_cast<std::size_t>(
          std::ceil(0.5 + std::sqrt(0.25 + static_cast<double>(m) / 2.0)));
      return grid2d(k, k);
    }
    case Family::random: {
      const std::size_t n = std::max<std::size_t>(m / 4, 2);
      return random(n, std::max(m, n - 1), seed);
    }
    case Family::complete: {
      const auto k = static_cast<std::size_t>(
          std::ceil(0.5 + std::sqrt(0.25 + 2.0 * static_cast<double>(m))));
      return complete(k);
    }
    case Family::star:
      return star(m);
  }
  throw ValidationError("unknown graph family");
}

}  // namespace sddkit::gen
