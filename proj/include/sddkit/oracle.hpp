#pragma once

// Dense brute-force reference computations. O(n^3); used by tests and
// --verify paths only, never by the solver itself.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "sddkit/error.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/vector_ops.hpp"

namespace sddkit::oracle {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

inline constexpr std::size_t kDefaultOracleLimit = 400;

/// Size cap for dense computations; SDDKIT_ORACLE_LIMIT overrides it.
inline std::size_t oracle_limit() {
  if (const char* env = std::getenv("SDDKIT_ORACLE_LIMIT")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultOracleLimit;
}

inline void require_oracle_size(std::size_t n, std::size_t limit = oracle_limit()) {
  if (n > limit) {
    throw SizeLimitError("dense oracle limited to n <= " + std::to_string(limit) +
                         ", got n = " + std::to_string(n));
  }
}

inline DenseMatrix dense_laplacian(const WeightedGraph& g, std::size_t limit = oracle_limit()) {
  require_oracle_size(g.num_vertices(), limit);
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  DenseMatrix l = DenseMatrix::Zero(n, n);
  for (const Edge& e : g.edges()) {
    l(e.u, e.u) += e.w;
    l(e.v, e.v) += e.w;
    l(e.u, e.v) -= e.w;
    l(e.v, e.u) -= e.w;
  }
  return l;
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix via its
/// eigendecomposition; eigenvalues below rel_tol * lambda_max count as zero.
inline DenseMatrix symmetric_pseudoinverse(const DenseMatrix& a, double rel_tol = 1e-10) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const DenseVector& lam = es.eigenvalues();
  const double cutoff = rel_tol * std::max(lam.cwiseAbs().maxCoeff(), 0.0);
  DenseVector inv = DenseVector::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) > cutoff) inv(i) = 1.0 / lam(i);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

inline DenseMatrix dense_pseudoinverse(const WeightedGraph& g) {
  return symmetric_pseudoinverse(dense_laplacian(g));
}

/// L^+ b for a graph Laplacian.
inline Vector dense_solve(const WeightedGraph& g, std::span<const double> b) {
  require_same_size(g.num_vertices(), b.size(), "dense_solve");
  const DenseMatrix lp = dense_pseudoinverse(g);
  const DenseVector x = lp * Eigen::Map<const DenseVector>(b.data(), b.size());
  return Vector(x.data(), x.data() + x.size());
}

/// R_e = (e_u - e_v)^T L^+ (e_u - e_v) for every edge, in edge order.
inline std::vector<double> effective_resistances(const WeightedGraph& g) {
  const DenseMatrix lp = dense_pseudoinverse(g);
  std::vector<double> r;
  r.reserve(g.num_edges());
  for (const Edge& e : g.edges())
    r.push_back(lp(e.u, e.u) + lp(e.v, e.v) - 2.0 * lp(e.u, e.v));
  return r;
}

/// w_e R_e for every edge (the edge leverage scores).
inline std::vector<double> leverage_scores(const WeightedGraph& g) {
  auto r = effective_resistances(g);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] *= g.edges()[k].w;
  return r;
}

/// Signed m x n edge-vertex incidence matrix; head = min(u, v) gets -1.
inline DenseMatrix incidence_matrix(const WeightedGraph& g) {
  const auto m = static_cast<Eigen::Index>(g.num_edges());
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  DenseMatrix gamma = DenseMatrix::Zero(m, n);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Edge& e = g.edges()[k];
    gamma(k, std::min(e.u, e.v)) = -1.0;
    gamma(k, std::max(e.u, e.v)) = 1.0;
  }
  return gamma;
}

/// Pi = W^{1/2} Gamma L^+ Gamma^T W^{1/2}, the orthogonal projection onto
/// the range of W^{1/2} Gamma.
inline DenseMatrix projection_matrix(const WeightedGraph& g) {
  require_oracle_size(g.num_edges(), 4 * oracle_limit());
  const DenseMatrix gamma = incidence_matrix(g);
  DenseVector sqrt_w(static_cast<Eigen::Index>(g.num_edges()));
  for (std::size_t k = 0; k < g.num_edges(); ++k)
    sqrt_w(static_cast<Eigen::Index>(k)) = std::sqrt(g.edges()[k].w);
  const DenseMatrix wg = sqrt_w.asDiagonal() * gamma;
  return wg * dense_pseudoinverse(g) * wg.transpose();
}

/// Orthonormal basis (n x (n-1)) of the vectors orthogonal to all-ones.
inline DenseMatrix mean_zero_basis(std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  DenseMatrix q = DenseMatrix::Zero(nn, nn - 1);
  // Helmert contrasts: column k is (1, ..., 1, -k, 0, ...) / sqrt(k (k + 1))
  for (Eigen::Index k = 1; k < nn; ++k) {
    const double s = 1.0 / std::sqrt(static_cast<double>(k) * static_cast<double>(k + 1));
    for (Eigen::Index i = 0; i < k; ++i) q(i, k - 1) = s;
    q(k, k - 1) = -static_cast<double>(k) * s;
  }
  return q;
}

struct GeneralizedBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double condition() const { return lambda_max / lambda_min; }
};

/// Extreme eigenvalues of L_H^+ L_G on the mean-zero subspace, i.e. the
/// tightest [lo, hi] with lo L_H <= L_G <= hi L_H. Both graphs must be
/// connected on the same vertex set.
inline GeneralizedBounds generalized_bounds(const DenseMatrix& lg, const DenseMatrix& lh) {
  if (lg.rows() != lh.rows()) throw DimensionError("generalized_bounds: vertex sets differ");
  const auto n = static_cast<std::size_t>(lg.rows());
  if (n < 2) return {1.0, 1.0};
  const DenseMatrix q = mean_zero_basis(n);
  const DenseMatrix a = q.transpose() * lg * q;
  const DenseMatrix b = q.transpose() * lh * q;
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(a, b, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("generalized eigenproblem failed (is H connected?)");
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

inline GeneralizedBounds generalized_bounds(const WeightedGraph& g, const WeightedGraph& h) {
  if (g.num_vertices() != h.num_vertices())
    throw DimensionError("generalized_bounds: vertex sets differ");
  require_connected(g);
  require_connected(h);
  return generalized_bounds(dense_laplacian(g), dense_laplacian(h));
}

struct SandwichResult {
  bool ok = false;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
};

/// Checks lower * L_H <= L_G <= upper * L_H up to slack 1e-9.
inline SandwichResult sandwich_check(const WeightedGraph& g, const WeightedGraph& h,
                                     double lower, double upper) {
  constexpr double kSlack = 1e-9;
  const GeneralizedBounds b = generalized_bounds(g, h);
  return {lower - kSlack <= b.lambda_min && b.lambda_max <= upper + kSlack, b.lambda_min,
          b.lambda_max};
}

/// ||x||_A for the Laplacian of g.
inline double laplacian_norm(const WeightedGraph& g, std::span<const double> x) {
  return std::sqrt(std::max(0.0, laplacian_quadratic_form(g, x)));
}

/// ||x - L^+ b||_A / ||L^+ b||_A against the dense reference solution.
inline double relative_anorm_error(const WeightedGraph& g, std::span<const double> b,
                                   std::span<const double> x) {
  Vector ref = dense_solve(g, b);
  const double denom = laplacian_norm(g, ref);
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = x[i] - ref[i];
  return denom > 0.0 ? laplacian_norm(g, ref) / denom : laplacian_norm(g, ref);
}

}  // namespace sddkit::oracle
