#pragma once

// Symmetric diagonally dominant matrices and their reduction to Laplacians.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sddkit/error.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/vector_ops.hpp"

namespace sddkit {

struct MatrixEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double value = 0.0;

  friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

/// Sparse symmetric diagonally dominant matrix.
///
/// Off-diagonal entries are kept once each in the strict lower triangle
/// (i > j), sorted by (i, j). Zero off-diagonals are dropped.
class SddMatrix {
 public:
  static constexpr double kDominanceTolerance = 1e-12;

  SddMatrix() = default;

  /// Builds from a coordinate list holding both triangles (every (i, j)
  /// must be matched by an equal (j, i)). Duplicates are summed.
  static SddMatrix from_full(std::size_t n, std::vector<MatrixEntry> entries) {
    for (const MatrixEntry& e : entries) check_entry(n, e);
    auto sorted = canonical_sum(entries);
    std::vector<MatrixEntry> lower;
    std::vector<double> diag(n, 0.0);
    // mirror lookups over the sorted (i, j) list
    auto find = [&](std::size_t i, std::size_t j) -> const MatrixEntry* {
      auto it = std::lower_bound(sorted.begin(), sorted.end(), MatrixEntry{i, j, 0.0},
                                 entry_less);
      return it != sorted.end() && it->i == i && it->j == j ? &*it : nullptr;
    };
    for (const MatrixEntry& e : sorted) {
      if (e.i == e.j) {
        diag[e.i] = e.value;
        continue;
      }
      const MatrixEntry* mirror = find(e.j, e.i);
      const double other = mirror ? mirror->value : 0.0;
      if (other != e.value) {
        throw ValidationError("matrix is not symmetric at (" + std::to_string(e.i) +
                              ", " + std::to_string(e.j) + ")");
      }
      if (e.i > e.j) lower.push_back(e);
    }
    return SddMatrix(n, std::move(diag), std::move(lower));
  }

  /// Builds from lower-triangle storage (i >= j), e.g. a symmetric Matrix
  /// Market file. Entries with i < j are mirrored; duplicates are errors.
  static SddMatrix from_lower(std::size_t n, std::vector<MatrixEntry> entries) {
    for (MatrixEntry& e : entries) {
      check_entry(n, e);
      if (e.i < e.j) std::swap(e.i, e.j);
    }
    std::sort(entries.begin(), entries.end(), entry_less);
    for (std::size_t k = 1; k < entries.size(); ++k) {
      if (entries[k].i == entries[k - 1].i && entries[k].j == entries[k - 1].j) {
        throw ValidationError("duplicate entry (" + std::to_string(entries[k].i) + ", " +
                              std::to_string(entries[k].j) + ")");
      }
    }
    std::vector<double> diag(n, 0.0);
    std::vector<MatrixEntry> lower;
    for (const MatrixEntry& e : entries) {
      if (e.i == e.j)
        diag[e.i] = e.value;
      else if (e.value != 0.0)
        lower.push_back(e);
    }
    return SddMatrix(n, std::move(diag), std::move(lower));
  }

  static SddMatrix laplacian_of(const WeightedGraph& g) {
    std::vector<double> diag(g.num_vertices(), 0.0);
    std::vector<MatrixEntry> lower;
    lower.reserve(g.num_edges());
    for (const Edge& e : g.edges()) {
      diag[e.u] += e.w;
      diag[e.v] += e.w;
      lower.push_back({e.v, e.u, -e.w});
    }
    std::sort(lower.begin(), lower.end(), entry_less);
    return SddMatrix(g.num_vertices(), std::move(diag), std::move(lower));
  }

  std::size_t size() const noexcept { return n_; }
  std::span<const double> diagonal() const noexcept { return diag_; }
  /// Strict lower triangle, sorted by (i, j).
  std::span<const MatrixEntry> lower() const noexcept { return lower_; }
  std::size_t nonzeros() const noexcept {
    std::size_t nz = 2 * lower_.size();
    for (double d : diag_)
      if (d != 0.0) ++nz;
    return nz;
  }

  /// A_ii - sum_{j != i} |A_ij| for every row.
  std::vector<double> row_excess() const {
    std::vector<double> ex(diag_);
    for (const MatrixEntry& e : lower_) {
      ex[e.i] -= std::abs(e.value);
      ex[e.j] -= std::abs(e.value);
    }
    return ex;
  }

  bool is_laplacian() const {
    for (const MatrixEntry& e : lower_)
      if (e.value > 0.0) return false;
    const auto ex = row_excess();
    const auto off = off_diagonal_abs_sums();
    for (std::size_t i = 0; i < n_; ++i)
      if (std::abs(ex[i]) > kDominanceTolerance * std::max({1.0, diag_[i], off[i]}))
        return false;
    return true;
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    require_same_size(n_, x.size(), "SddMatrix::apply (x)");
    require_same_size(n_, y.size(), "SddMatrix::apply (y)");
    for (std::size_t i = 0; i < n_; ++i) y[i] = diag_[i] * x[i];
    for (const MatrixEntry& e : lower_) {
      y[e.i] += e.value * x[e.j];
      y[e.j] += e.value * x[e.i];
    }
  }

  Vector apply(std::span<const double> x) const {
    Vector y(n_);
    apply(x, y);
    return y;
  }

  friend bool operator==(const SddMatrix&, const SddMatrix&) = default;

 private:
  SddMatrix(std::size_t n, std::vector<double> diag, std::vector<MatrixEntry> lower)
      : n_(n), diag_(std::move(diag)), lower_(std::move(lower)) {
    const auto off = off_diagonal_abs_sums();
    for (std::size_t i = 0; i < n_; ++i) {
      const double slack = kDominanceTolerance * std::max({1.0, std::abs(diag_[i]), off[i]});
      if (diag_[i] + slack < off[i]) throw DominanceError(i, diag_[i], off[i]);
    }
  }

  std::vector<double> off_diagonal_abs_sums() const {
    std::vector<double> s(n_, 0.0);
    for (const MatrixEntry& e : lower_) {
      s[e.i] += std::abs(e.value);
      s[e.j] += std::abs(e.value);
    }
    return s;
  }

  static bool entry_less(const MatrixEntry& a, const MatrixEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  }

  static void check_entry(std::size_t n, const MatrixEntry& e) {
    if (e.i >= n || e.j >= n)
      throw ValidationError("entry (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                            ") out of range");
    if (!std::isfinite(e.value))
      throw ValidationError("non-finite entry at (" + std::to_string(e.i) + ", " +
                            std::to_string(e.j) + ")");
  }

  static std::vector<MatrixEntry> canonical_sum(std::vector<MatrixEntry> entries) {
    std::sort(entries.begin(), entries.end(), entry_less);
    std::vector<MatrixEntry> out;
    for (const MatrixEntry& e : entries) {
      if (!out.empty() && out.back().i == e.i && out.back().j == e.j)
        out.back().value += e.value;
      else
        out.push_back(e);
    }
    return out;
  }

  std::size_t n_ = 0;
  std::vector<double> diag_;
  std::vector<MatrixEntry> lower_;
};

enum class ReductionKind { identity, double_cover };

/// Correspondence between an SDD system and the Laplacian system that
/// replaces it. For the double cover, vertex i is u_i and vertex n + i is
/// its mirror.
struct ReductionMap {
  ReductionKind kind = ReductionKind::identity;
  std::size_t original_n = 0;

  std::size_t reduced_n() const noexcept {
    return kind == ReductionKind::identity ? original_n : 2 * original_n;
  }
  Vertex forward(std::size_t i) const noexcept { return static_cast<Vertex>(i); }
  Vertex mirror(std::size_t i) const noexcept {
    return static_cast<Vertex>(original_n + i);
  }

  /// Lifts a right-hand side: b for identity, (b, -b) for the double cover.
  Vector lift_rhs(std::span<const double> b) const {
    require_same_size(original_n, b.size(), "ReductionMap::lift_rhs");
    Vector out(b.begin(), b.end());
    if (kind == ReductionKind::double_cover)
      for (double v : b) out.push_back(-v);
    return out;
  }

  /// x_i = (xhat_{u_i} - xhat_{mirror_i}) / 2 for the double cover.
  Vector back_map(std::span<const double> xhat) const {
    require_same_size(reduced_n(), xhat.size(), "ReductionMap::back_map");
    if (kind == ReductionKind::identity) return Vector(xhat.begin(), xhat.end());
    Vector x(original_n);
    for (std::size_t i = 0; i < original_n; ++i)
      x[i] = 0.5 * (xhat[i] - xhat[original_n + i]);
    return x;
  }
};

struct LaplacianReduction {
  WeightedGraph graph;
  Vector rhs;
  ReductionMap map;
};

/// Rewrites A x = b as a Laplacian system (identity when A already is a
/// Laplacian, otherwise the 2n-vertex double cover).
inline LaplacianReduction sdd_to_laplacian(const SddMatrix& a, std::span<const double> b) {
  const std::size_t n = a.size();
  require_same_size(n, b.size(), "sdd_to_laplacian (rhs)");
  LaplacianReduction out;
  out.map.original_n = n;
  std::vector<Edge> edges;
  if (a.is_laplacian()) {
    out.map.kind = ReductionKind::identity;
    for (const MatrixEntry& e : a.lower())
      edges.push_back({static_cast<Vertex>(e.i), static_cast<Vertex>(e.j), -e.value});
    out.graph = WeightedGraph(n, std::move(edges));
    out.rhs = out.map.lift_rhs(b);
    return out;
  }
  out.map.kind = ReductionKind::double_cover;
  const ReductionMap& m = out.map;
  for (const MatrixEntry& e : a.lower()) {
    const double w = std::abs(e.value);
    if (e.value < 0.0) {
      edges.push_back({m.forward(e.i), m.forward(e.j), w});
      edges.push_back({m.mirror(e.i), m.mirror(e.j), w});
    } else {
      edges.push_back({m.forward(e.i), m.mirror(e.j), w});
      edges.push_back({m.forward(e.j), m.mirror(e.i), w});
    }
  }
  const auto excess = a.row_excess();
  for (std::size_t i = 0; i < n; ++i) {
    const double tol = SddMatrix::kDominanceTolerance * std::max(1.0, std::abs(a.diagonal()[i]));
    // (u_i, mirror_i) enters row i twice on (x, -x), so it carries half the excess
    if (excess[i] > tol) edges.push_back({m.forward(i), m.mirror(i), 0.5 * excess[i]});
  }
  out.graph = WeightedGraph(2 * n, std::move(edges));
  out.rhs = out.map.lift_rhs(b);
  return out;
}

}  // namespace sddkit
