#pragma once

// Shared helpers for the test suites: small graph corpora, random vectors
// and dense reference computations written independently of the library.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sddkit/generators.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/rng.hpp"
#include "sddkit/sdd.hpp"

namespace testing_support {

using sddkit::Vector;
using sddkit::WeightedGraph;

inline Vector random_vector(std::size_t n, std::uint64_t seed) {
  sddkit::Rng rng(seed);
  Vector v(n);
  for (double& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

inline Vector random_mean_zero(std::size_t n, std::uint64_t seed) {
  Vector v = random_vector(n, seed);
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x -= s / static_cast<double>(n);
  return v;
}

/// Dense Laplacian assembled entry by entry.
inline Eigen::MatrixXd laplacian_matrix(const WeightedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    l(e.u, e.v) -= e.w;
    l(e.v, e.u) -= e.w;
    l(e.u, e.u) += e.w;
    l(e.v, e.v) += e.w;
  }
  return l;
}

/// L^+ b for a connected graph by a grounded solve: fix x_0 = 0, solve the
/// remaining (n-1) x (n-1) system, then remove the mean.
inline Vector grounded_solve(const WeightedGraph& g, const Vector& b) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  const Eigen::MatrixXd l = laplacian_matrix(g);
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
  rhs.array() -= rhs.mean();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (n > 1) x.tail(n - 1) = l.bottomRightCorner(n - 1, n - 1).ldlt().solve(rhs.tail(n - 1));
  x.array() -= x.mean();
  return Vector(x.data(), x.data() + n);
}

inline double relative_error(const Vector& x, const Vector& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - ref[i]) * (x[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// ||x||_L computed from the dense Laplacian.
inline double anorm(const WeightedGraph& g, const Vector& x) {
  const Eigen::MatrixXd l = laplacian_matrix(g);
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  return std::sqrt(std::max(0.0, v.dot(l * v)));
}

struct NamedGraph {
  std::string name;
  WeightedGraph g;
};

/// Small connected graphs of every generator family, unit and spread weights.
inline std::vector<NamedGraph> small_corpus() {
  namespace gen = sddkit::gen;
  std::vector<NamedGraph> out;
  out.push_back({"path12", gen::path(12)});
  out.push_back({"cycle15", gen::cycle(15)});
  out.push_back({"grid5x7", gen::grid2d(5, 7)});
  out.push_back({"complete9", gen::complete(9)});
  out.push_back({"star10", gen::star(10)});
  for (std::uint64_t s = 0; s < 6; ++s) {
    const std::size_t n = 20 + 7 * s;
    out.push_back({"random" + std::to_string(s), gen::random(n, 2 * n + s, s, s % 2 ? 100.0 : 1.0)});
  }
  return out;
}

/// Random SDD matrix with mixed-sign off-diagonals and some strictly
/// dominant rows; connected sparsity pattern.
inline sddkit::SddMatrix random_sdd(std::size_t n, std::uint64_t seed) {
  sddkit::Rng rng(seed);
  const WeightedGraph pattern = sddkit::gen::random(n, std::min(n * (n - 1) / 2, 3 * n), seed, 10.0);
  std::vector<sddkit::MatrixEntry> entries;
  std::vector<double> rowsum(n, 0.0);
  for (const auto& e : pattern.edges()) {
    const double v = rng.uniform() < 0.5 ? -e.w : e.w;
    entries.push_back({e.u, e.v, v});
    entries.push_back({e.v, e.u, v});
    rowsum[e.u] += e.w;
    rowsum[e.v] += e.w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double extra = rng.uniform() < 0.3 ? rng.uniform() * rowsum[i] : 0.0;
    entries.push_back({i, i, rowsum[i] + extra + 1e-3});
  }
  return sddkit::SddMatrix::from_full(n, std::move(entries));
}

inline Eigen::MatrixXd dense_matrix(const sddkit::SddMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = a.diagonal()[static_cast<std::size_t>(i)];
  for (const auto& e : a.lower()) {
    m(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.value;
    m(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.value;
  }
  return m;
}

}  // namespace testing_support
