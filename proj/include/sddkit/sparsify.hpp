#pragma once

// Sparsification by oversampling, and the incremental sparsifier built on a
// scaled low-stretch spanning tree.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sddkit/error.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/lowstretch.hpp"
#include "sddkit/oracle.hpp"
#include "sddkit/rng.hpp"

namespace sddkit {

inline constexpr double kDefaultOversampling = 5.0;

/// Sample count and normalization for one call of sample().
struct SampleSpec {
  double t = 0.0;        // sum of p'
  double xi = 0.5;       // failure probability
  double cs = kDefaultOversampling;
  std::uint64_t q = 1;   // number of draws

  /// q = ceil(cs * t * ln t * ln(1/xi)), at least 1.
  static SampleSpec make(double t, double xi, double cs) {
    if (!(xi > 0.0 && xi < 1.0))
      throw ValidationError("xi must lie in (0, 1), got " + std::to_string(xi));
    if (!(cs > 0.0) || !std::isfinite(cs))
      throw ValidationError("oversampling constant must be positive");
    if (!(t > 0.0) || !std::isfinite(t))
      throw ValidationError("sampling weights sum to zero or are not finite");
    SampleSpec s;
    s.t = t;
    s.xi = xi;
    s.cs = cs;
    const double raw = std::ceil(cs * t * std::log(t) * std::log(1.0 / xi));
    if (raw > 1e15) throw ValidationError("sample count overflows");
    s.q = raw >= 1.0 ? static_cast<std::uint64_t>(raw) : 1;
    return s;
  }
};

namespace detail {

inline double checked_sum(std::span<const double> p) {
  double t = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("sampling weights must be finite and non-negative");
    t += v;
  }
  if (!(t > 0.0)) throw ValidationError("sampling weights are all zero");
  return t;
}

/// Draws count indices from the distribution proportional to weights
/// (cumulative intervals + binary search); every pick of e adds
/// edge_w[e] * scale * total / weights[e] to out[e].
inline void draw_into(std::span<const double> weights, double total, std::uint64_t count,
                      std::span<const double> edge_w, double scale, Rng& rng,
                      std::vector<double>& out, std::vector<std::uint64_t>* picks) {
  std::vector<double> cumulative(weights.size());
  double acc = 0.0;
  for (std::size_t e = 0; e < weights.size(); ++e) {
    acc += weights[e];
    cumulative[e] = acc;
  }
  for (std::uint64_t k = 0; k < count; ++k) {
    const double r = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    if (it == cumulative.end()) --it;
    auto e = static_cast<std::size_t>(it - cumulative.begin());
    while (weights[e] == 0.0 && e + 1 < weights.size()) ++e;  // guard for r on a boundary
    out[e] += edge_w[e] * scale * total / weights[e];
    if (picks) ++(*picks)[e];
  }
}

inline WeightedGraph graph_from_weights(std::size_t n, std::span<const Edge> edges,
                                        std::span<const double> weight) {
  std::vector<Edge> out;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (weight[e] > 0.0) out.push_back({edges[e].u, edges[e].v, weight[e]});
  return WeightedGraph(n, std::move(out));
}

}  // namespace detail

struct SampleResult {
  WeightedGraph graph;
  SampleSpec spec;
  std::size_t distinct_edges = 0;
};

/// Draws q edges independently with probability p_e = p'_e / t; each pick of
/// e adds w_e / (q p_e). Repeated picks merge, so the result is simple.
inline SampleResult sample(const WeightedGraph& g, std::span<const double> p_prime, double xi,
                           Rng& rng, double cs = kDefaultOversampling) {
  require_same_size(g.num_edges(), p_prime.size(), "sample (p')");
  const double t = detail::checked_sum(p_prime);
  SampleResult res;
  res.spec = SampleSpec::make(t, xi, cs);
  std::vector<double> w(g.num_edges()), out(g.num_edges(), 0.0);
  for (std::size_t e = 0; e < w.size(); ++e) w[e] = g.edges()[e].w;
  detail::draw_into(p_prime, t, res.spec.q, w, 1.0 / static_cast<double>(res.spec.q), rng, out,
                    nullptr);
  res.graph = detail::graph_from_weights(g.num_vertices(), g.edges(), out);
  res.distinct_edges = res.graph.num_edges();
  return res;
}

enum class SparsifyMode {
  literal,    // every edge sampled, tree edges at p' = 1
  keep_tree,  // scaled tree kept whole, only off-tree edges sampled
};

inline const char* to_string(SparsifyMode m) {
  return m == SparsifyMode::literal ? "literal" : "keep-tree";
}

inline SparsifyMode parse_sparsify_mode(const std::string& s) {
  if (s == "literal") return SparsifyMode::literal;
  if (s == "keep-tree" || s == "keep_tree") return SparsifyMode::keep_tree;
  throw ValidationError("unknown sparsify mode '" + s + "'");
}

struct SparsifyOptions {
  SparsifyMode mode = SparsifyMode::keep_tree;
  double cs = kDefaultOversampling;
  LowStretchOptions tree;
};

struct SparsifyResult {
  WeightedGraph graph;  // H, already doubled
  SparsifyMode mode = SparsifyMode::keep_tree;
  SampleSpec spec;               // q, t used by the sampler
  double off_tree_weight = 0.0;  // t': sum of p' over off-tree edges
  double tree_stretch = 0.0;     // total stretch of the unscaled tree
  TreeConstruction construction = TreeConstruction::star_decomposition;
  std::uint64_t off_tree_picks = 0;   // X, draws landing on off-tree edges
  std::size_t off_tree_edges = 0;     // distinct off-tree edges in H
  std::size_t tree_edges = 0;

  /// E[X] = q t' / t.
  double expected_off_tree_picks() const {
    return spec.t > 0.0 ? static_cast<double>(spec.q) * off_tree_weight / spec.t : 0.0;
  }
};

/// Incremental sparsifier H with G <= H <= 3 kappa G (w.h.p.): scale a
/// low-stretch tree by kappa, oversample by stretch over the scaled tree
/// with failure probability xi / 2, and return twice the sample.
inline SparsifyResult incremental_sparsify(const WeightedGraph& g, double kappa, double xi,
                                           Rng& rng, const SparsifyOptions& opts = {},
                                           const LowStretchResult* precomputed_tree = nullptr) {
  require_connected(g);
  const std::size_t m = g.num_edges();
  if (!(kappa >= 1.0) || !std::isfinite(kappa))
    throw ValidationError("kappa must be >= 1, got " + std::to_string(kappa));
  if (kappa >= static_cast<double>(m) && m > 0 && kappa > 1.0)
    throw ValidationError("kappa = " + std::to_string(kappa) + " must be below m = " +
                          std::to_string(m));
  if (!(xi > 0.0 && xi < 1.0))
    throw ValidationError("xi must lie in (0, 1), got " + std::to_string(xi));

  const LowStretchResult lst = precomputed_tree ? *precomputed_tree : low_stretch_tree(g, opts.tree);
  const StretchTable table = compute_stretch(g, lst.tree);
  const std::vector<double> p_prime = scaled_probabilities(table, kappa);

  SparsifyResult res;
  res.mode = opts.mode;
  res.tree_stretch = table.total_stretch;
  res.construction = lst.construction;

  // G': tree edges scaled by kappa
  std::vector<double> gp_w(m);
  for (std::size_t e = 0; e < m; ++e)
    gp_w[e] = g.edges()[e].w * (table.is_tree[e] ? kappa : 1.0);

  double t_tree = 0.0;
  for (std::size_t e = 0; e < m; ++e) {
    if (table.is_tree[e])
      t_tree += p_prime[e];
    else
      res.off_tree_weight += p_prime[e];
  }
  const double t = t_tree + res.off_tree_weight;
  const double sample_xi = xi / 2.0;
  std::vector<double> out(m, 0.0);

  if (m == 0) {
    res.graph = WeightedGraph(g.num_vertices(), {});
    return res;
  }
  res.spec = SampleSpec::make(t, sample_xi, opts.cs);
  const double inv_q = 1.0 / static_cast<double>(res.spec.q);

  if (opts.mode == SparsifyMode::literal) {
    std::vector<std::uint64_t> picks(m, 0);
    detail::draw_into(p_prime, t, res.spec.q, gp_w, inv_q, rng, out, &picks);
    for (std::size_t e = 0; e < m; ++e)
      if (!table.is_tree[e]) res.off_tree_picks += picks[e];
  } else {
    for (std::size_t e = 0; e < m; ++e)
      if (table.is_tree[e]) out[e] = gp_w[e];
    if (res.off_tree_weight > 0.0) {
      // the number of off-tree draws among q is Binomial(q, t'/t)
      std::binomial_distribution<std::uint64_t> count(res.spec.q,
                                                      std::min(1.0, res.off_tree_weight / t));
      res.off_tree_picks = count(rng);
      std::vector<double> off(m);
      for (std::size_t e = 0; e < m; ++e) off[e] = table.is_tree[e] ? 0.0 : p_prime[e];
      // picks follow p'_e / t' but each adds w_e / (q p'_e / t)
      detail::draw_into(off, t, res.off_tree_picks, gp_w, inv_q, rng, out, nullptr);
    }
  }
  for (double& w : out) w *= 2.0;
  res.graph = detail::graph_from_weights(g.num_vertices(), g.edges(), out);
  for (const Edge& e : res.graph.edges()) {
    const EdgeId id = g.find_edge(e.u, e.v);
    if (table.is_tree[id])
      ++res.tree_edges;
    else
      ++res.off_tree_edges;
  }
  return res;
}

/// Fraction of `trials` independent samples G' with G <= 2G' <= 3G,
/// checked with the dense oracle. Disconnected samples count as failures.
inline double oversample_check(const WeightedGraph& g, std::span<const double> p_prime,
                               double xi, std::size_t trials, std::uint64_t seed,
                               double cs = kDefaultOversampling) {
  if (trials == 0) throw ValidationError("oversample_check needs at least one trial");
  std::size_t pass = 0;
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng(derive_seed(seed, {k}));
    const SampleResult s = sample(g, p_prime, xi, rng, cs);
    if (!is_connected(s.graph)) continue;
    if (oracle::sandwich_check(g, s.graph.scaled(2.0), 1.0 / 3.0, 1.0).ok) ++pass;
  }
  return static_cast<double>(pass) / static_cast<double>(trials);
}

}  // namespace sddkit
