#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>

#include "sddkit/generators.hpp"
#include "sddkit/oracle.hpp"
#include "sddkit/rng.hpp"
#include "support.hpp"

using namespace sddkit;
namespace ts = testing_support;
using oracle::DenseMatrix;

namespace {

WeightedGraph shuffled(const WeightedGraph& g, std::uint64_t seed) {
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  Rng rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);
  for (Edge& e : edges)
    if (rng.uniform() < 0.5) std::swap(e.u, e.v);
  return WeightedGraph(g.num_vertices(), std::move(edges));
}

// Resistance by a grounded solve, independent of the eigen-based oracle.
double grounded_resistance(const WeightedGraph& g, Vertex u, Vertex v) {
  Vector b(g.num_vertices(), 0.0);
  b[u] = 1.0;
  b[v] = -1.0;
  const Vector x = ts::grounded_solve(g, b);
  return x[u] - x[v];
}

}  // namespace

TEST(Pseudoinverse, PathTwo) {
  const DenseMatrix p = oracle::dense_pseudoinverse(gen::path(2));
  EXPECT_NEAR(p(0, 0), 0.25, 1e-14);
  EXPECT_NEAR(p(0, 1), -0.25, 1e-14);
  EXPECT_NEAR(p(1, 0), -0.25, 1e-14);
  EXPECT_NEAR(p(1, 1), 0.25, 1e-14);
}

TEST(Pseudoinverse, AnnihilatesOnesAndReproducesL) {
  for (const auto& [name, g] : ts::small_corpus()) {
    const DenseMatrix p = oracle::dense_pseudoinverse(g);
    const Eigen::MatrixXd l = ts::laplacian_matrix(g);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(l.rows());
    EXPECT_LT((p * ones).norm(), 1e-9) << name;
    EXPECT_LT((l * p * l - l).norm(), 1e-8 * std::max(1.0, l.norm())) << name;
  }
}

TEST(Pseudoinverse, TriangleGivesMeanZeroProjector) {
  const DenseMatrix p = oracle::dense_pseudoinverse(gen::complete(3));
  const Eigen::MatrixXd expected =
      Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
  EXPECT_LT((p * ts::laplacian_matrix(gen::complete(3)) - expected).norm(), 1e-12);
}

TEST(Pseudoinverse, SizeLimitEnforced) {
  EXPECT_THROW(oracle::dense_laplacian(gen::path(50), 10), SizeLimitError);
}

TEST(Resistance, SingleEdge) {
  const WeightedGraph g(2, {{0, 1, 4.0}});
  EXPECT_NEAR(oracle::effective_resistances(g)[0], 0.25, 1e-14);
}

TEST(Resistance, Triangle) {
  const auto r = oracle::effective_resistances(gen::complete(3));
  for (double v : r) EXPECT_NEAR(v, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 2.0, 1e-12);
}

TEST(Resistance, Cycle) {
  for (std::size_t n : {3u, 7u, 20u}) {
    for (double v : oracle::effective_resistances(gen::cycle(n)))
      EXPECT_NEAR(v, static_cast<double>(n - 1) / static_cast<double>(n), 1e-12);
  }
}

TEST(Resistance, MatchesGroundedSolve) {
  for (const auto& [name, g] : ts::small_corpus()) {
    const auto r = oracle::effective_resistances(g);
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const double ref = grounded_resistance(g, g.edge(e).u, g.edge(e).v);
      EXPECT_NEAR(r[e], ref, 1e-9 * ref) << name << " edge " << e;
    }
  }
}

TEST(Resistance, LeverageSumsToRank) {
  for (const auto& [name, g] : ts::small_corpus()) {
    const auto lev = oracle::leverage_scores(g);
    EXPECT_NEAR(std::accumulate(lev.begin(), lev.end(), 0.0),
                static_cast<double>(g.num_vertices() - 1), 1e-8)
        << name;
  }
}

TEST(Projection, IdentitiesOnCorpus) {
  for (const auto& [name, g] : ts::small_corpus()) {
    const DenseMatrix pi = oracle::projection_matrix(g);
    const auto lev = oracle::leverage_scores(g);
    EXPECT_LT((pi * pi - pi).norm(), 1e-8) << name;
    EXPECT_NEAR(pi.trace(), static_cast<double>(g.num_vertices() - 1), 1e-8) << name;
    for (EdgeId e = 0; e < g.num_edges(); ++e) EXPECT_NEAR(pi(e, e), lev[e], 1e-8) << name;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(pi, Eigen::EigenvaluesOnly);
    for (double v : es.eigenvalues()) EXPECT_TRUE(std::abs(v) < 1e-8 || std::abs(v - 1.0) < 1e-8) << name;
  }
}

TEST(Projection, TreeIsIdentity) {
  const WeightedGraph tree = gen::random(15, 14, 4, 30.0);
  EXPECT_LT((oracle::projection_matrix(tree) - DenseMatrix::Identity(14, 14)).norm(), 1e-9);
}

TEST(Projection, TriangleDiagonal) {
  const DenseMatrix pi = oracle::projection_matrix(gen::complete(3));
  for (int e = 0; e < 3; ++e) EXPECT_NEAR(pi(e, e), 2.0 / 3.0, 1e-12);
}

TEST(Projection, IndependentConstruction) {
  // W^{1/2} B L^+ B^T W^{1/2} assembled from the grounded solve
  const WeightedGraph g = gen::random(12, 25, 8, 10.0);
  const auto m = static_cast<Eigen::Index>(g.num_edges());
  const DenseMatrix pi = oracle::projection_matrix(g);
  for (Eigen::Index f = 0; f < m; ++f) {
    const Edge& ef = g.edge(static_cast<EdgeId>(f));
    Vector b(g.num_vertices(), 0.0);
    b[std::min(ef.u, ef.v)] += 1.0;
    b[std::max(ef.u, ef.v)] -= 1.0;
    const Vector x = ts::grounded_solve(g, b);
    for (Eigen::Index e = 0; e < m; ++e) {
      const Edge& ee = g.edge(static_cast<EdgeId>(e));
      const double v = (x[std::min(ee.u, ee.v)] - x[std::max(ee.u, ee.v)]) * std::sqrt(ee.w * ef.w);
      EXPECT_NEAR(pi(e, f), v, 1e-9);
    }
  }
}

TEST(Projection, ResamplingExpectation) {
  // y = Pi(:,e) / sqrt(p_e) with p_e = Pi(e,e)/(n-1) has E[y y^T] = Pi
  const WeightedGraph g = gen::random(14, 28, 21, 5.0);
  const DenseMatrix pi = oracle::projection_matrix(g);
  const auto m = pi.rows();
  const double rank = static_cast<double>(g.num_vertices() - 1);
  std::vector<double> cumulative(static_cast<std::size_t>(m));
  double acc = 0.0;
  for (Eigen::Index e = 0; e < m; ++e) cumulative[static_cast<std::size_t>(e)] = acc += pi(e, e) / rank;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(m), 0);
  Rng rng(77);
  constexpr std::size_t kDraws = 100000;
  for (std::size_t k = 0; k < kDraws; ++k) {
    const double r = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    if (it == cumulative.end()) --it;
    ++counts[static_cast<std::size_t>(it - cumulative.begin())];
  }
  DenseMatrix mean = DenseMatrix::Zero(m, m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const double pe = pi(e, e) / rank;
    const double freq = static_cast<double>(counts[static_cast<std::size_t>(e)]) / kDraws;
    mean += (freq / pe) * pi.col(e) * pi.col(e).transpose();
  }
  EXPECT_LT((mean - pi).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Sandwich, IdenticalGraphs) {
  const WeightedGraph g = gen::random(20, 50, 2, 10.0);
  const auto b = oracle::generalized_bounds(g, g);
  EXPECT_NEAR(b.lambda_min, 1.0, 1e-9);
  EXPECT_NEAR(b.lambda_max, 1.0, 1e-9);
  EXPECT_TRUE(oracle::sandwich_check(g, g, 1.0, 1.0).ok);
}

TEST(Sandwich, ScaledGraph) {
  const WeightedGraph g = gen::grid2d(4, 5);
  const auto s = oracle::sandwich_check(g, g.scaled(2.0), 0.5, 0.5);
  EXPECT_TRUE(s.ok);
  EXPECT_NEAR(s.lambda_lo, 0.5, 1e-9);
  EXPECT_NEAR(s.lambda_hi, 0.5, 1e-9);
  EXPECT_FALSE(oracle::sandwich_check(g, g.scaled(2.0), 1.0, 1.0).ok);
}

TEST(Sandwich, CycleOverPathGrowsLinearly) {
  for (std::size_t n : {8u, 16u, 32u}) {
    const auto b = oracle::generalized_bounds(gen::cycle(n), gen::path(n));
    EXPECT_GE(b.condition(), static_cast<double>(n) / 4.0) << n;
  }
}

TEST(Sandwich, DifferentVertexSetsRejected) {
  EXPECT_THROW(oracle::generalized_bounds(gen::path(4), gen::path(5)), DimensionError);
}

TEST(Oracle, PermutationInvariance) {
  const WeightedGraph g = gen::random(25, 60, 13, 20.0);
  const WeightedGraph h = shuffled(g, 99);
  EXPECT_LT((oracle::dense_pseudoinverse(g) - oracle::dense_pseudoinverse(h)).norm(), 1e-10);
  const auto rg = oracle::effective_resistances(g);
  const auto rh = oracle::effective_resistances(h);
  for (EdgeId e = 0; e < g.num_edges(); ++e) EXPECT_NEAR(rg[e], rh[e], 1e-12);
  const auto a = oracle::generalized_bounds(g, gen::random(25, 40, 1));
  const auto b = oracle::generalized_bounds(h, gen::random(25, 40, 1));
  EXPECT_NEAR(a.lambda_min, b.lambda_min, 1e-9);
  EXPECT_NEAR(a.lambda_max, b.lambda_max, 1e-9 * a.lambda_max);
}
