#include <gtest/gtest.h>

#include <map>

#include "sddkit/elimination.hpp"
#include "sddkit/generators.hpp"
#include "support.hpp"

using namespace sddkit;
namespace ts = testing_support;

namespace {

// Full solve through the factor: forward, dense solve on the reduced graph,
// backward.
Vector factor_solve(const EliminationResult& r, const Vector& c) {
  const ForwardResult fw = factor_forward(r.factor, c);
  Vector xb(r.reduced.num_vertices(), 0.0);
  if (r.reduced.num_vertices() > 1) xb = ts::grounded_solve(r.reduced, fw.bottom);
  Vector x = factor_backward(r.factor, fw.top, xb);
  project_mean_zero(x);
  return x;
}

std::vector<WeightedGraph> random_graphs(std::size_t count, std::size_t max_n, std::uint64_t base) {
  std::vector<WeightedGraph> out;
  for (std::uint64_t s = 0; s < count; ++s) {
    const std::size_t n = 2 + (s * 53 + 7) % (max_n - 1);
    const std::size_t extra = (s * 13) % (n / 2 + 3);
    const std::size_t m = std::min(n * (n - 1) / 2, n - 1 + extra);
    out.push_back(gen::random(n, m, base + s, s % 2 ? 50.0 : 1.0));
  }
  return out;
}

}  // namespace

TEST(GreedyElimination, PathCollapses) {
  const EliminationResult r = greedy_elimination(gen::path(5));
  EXPECT_EQ(r.reduced.num_vertices(), 1u);
  EXPECT_EQ(r.reduced.num_edges(), 0u);
  ASSERT_EQ(r.factor.steps.size(), 4u);
  for (const Pivot& p : r.factor.steps) EXPECT_FALSE(p.degree_two());
}

TEST(GreedyElimination, SeriesMerge) {
  // 1 - 0 - 2 with unit weights; 1 and 2 sit inside K4 on {1, 2, 3, 4}
  std::vector<Edge> edges{{0, 1, 1.0}, {0, 2, 1.0}};
  for (Vertex a = 1; a <= 4; ++a)
    for (Vertex b = a + 1; b <= 4; ++b) edges.push_back({a, b, 1.0});
  const EliminationResult r = greedy_elimination(WeightedGraph(5, edges));
  ASSERT_EQ(r.factor.steps.size(), 1u);
  const Pivot& p = r.factor.steps[0];
  EXPECT_EQ(p.v, 0u);
  EXPECT_TRUE(p.degree_two());
  EXPECT_DOUBLE_EQ(p.merged_weight(), 0.5);
  // the spliced edge sums with the existing (1, 2) edge
  const Edge& e = r.reduced.edge(r.reduced.find_edge(r.factor.survivor_map[1], r.factor.survivor_map[2]));
  EXPECT_DOUBLE_EQ(e.w, 1.5);
}

TEST(GreedyElimination, CycleFourMatchesSchurComplement) {
  const WeightedGraph g = gen::cycle(4);
  const EliminationResult r = greedy_elimination(g);
  EXPECT_EQ(r.reduced.num_vertices(), 1u);
  ASSERT_EQ(r.factor.steps.size(), 3u);
  EXPECT_EQ(r.factor.steps[0].v, 0u);
  EXPECT_DOUBLE_EQ(r.factor.steps[0].merged_weight(), 0.5);
  EXPECT_EQ(r.factor.steps[1].v, 1u);
  EXPECT_DOUBLE_EQ(r.factor.steps[1].merged_weight(), 1.0 / 3.0);
  // the last pivot sees the parallel sum 1 + 1/3
  EXPECT_FALSE(r.factor.steps[2].degree_two());
  EXPECT_NEAR(r.factor.steps[2].w1, 4.0 / 3.0, 1e-15);

  // dense Schur complement onto {2, 3}
  const Eigen::MatrixXd l = ts::laplacian_matrix(g);
  const Eigen::MatrixXd s =
      l.bottomRightCorner(2, 2) - l.bottomLeftCorner(2, 2) * l.topLeftCorner(2, 2).inverse() *
                                      l.topRightCorner(2, 2);
  EXPECT_NEAR(-s(0, 1), 4.0 / 3.0, 1e-14);
}

TEST(GreedyElimination, ReducedGraphIsSchurComplement) {
  for (const WeightedGraph& g : random_graphs(20, 60, 500)) {
    const EliminationResult r = greedy_elimination(g);
    if (r.reduced.num_vertices() < 2) continue;
    const Eigen::MatrixXd l = ts::laplacian_matrix(g);
    std::vector<Eigen::Index> elim, keep;
    for (Vertex x = 0; x < g.num_vertices(); ++x)
      (r.factor.survivor_map[x] == kNoVertex ? elim : keep).push_back(x);
    const Eigen::MatrixXd s = l(keep, keep) - l(keep, elim) * l(elim, elim).inverse() * l(elim, keep);
    const Eigen::MatrixXd got = ts::laplacian_matrix(r.reduced);
    EXPECT_LT((s - got).norm(), 1e-10 * s.norm());
  }
}

TEST(FactorForward, SingleLeaf) {
  const EliminationResult r = greedy_elimination(gen::path(2));
  ASSERT_EQ(r.factor.steps.size(), 1u);
  const Vertex v = r.factor.steps[0].v;
  Vector c(2);
  c[v] = 1.0;
  c[1 - v] = -1.0;
  const ForwardResult fw = factor_forward(r.factor, c);
  ASSERT_EQ(fw.bottom.size(), 1u);
  EXPECT_EQ(fw.bottom[0], 0.0);
  EXPECT_EQ(fw.top[0], 1.0);
}

TEST(FactorForward, EmptyFactorIsIdentity) {
  const WeightedGraph g = gen::complete(5);
  const EliminationResult r = greedy_elimination(g);
  EXPECT_TRUE(r.factor.steps.empty());
  const Vector c = ts::random_mean_zero(5, 1);
  const ForwardResult fw = factor_forward(r.factor, c);
  EXPECT_TRUE(fw.top.empty());
  EXPECT_EQ(fw.bottom, c);
  const Vector xb = ts::random_vector(5, 2);
  EXPECT_EQ(factor_backward(r.factor, fw.top, xb), xb);
}

TEST(FactorRoundTrip, PathThree) {
  const WeightedGraph g = gen::path(3);
  const Vector c{1.0, 0.0, -1.0};
  const EliminationResult r = greedy_elimination(g);
  EXPECT_LT(ts::relative_error(factor_solve(r, c), ts::grounded_solve(g, c)), 1e-10);
}

TEST(FactorRoundTrip, PathFive) {
  const WeightedGraph g = gen::path(5, 2.5);
  const Vector c = ts::random_mean_zero(5, 3);
  EXPECT_LT(ts::relative_error(factor_solve(greedy_elimination(g), c), ts::grounded_solve(g, c)), 1e-10);
}

TEST(FactorBackward, StarLeavesSatisfyLocalEquation) {
  const WeightedGraph g = gen::star(4, 3.0);
  const EliminationResult r = greedy_elimination(g);
  const Vector c = ts::random_mean_zero(5, 4);
  const ForwardResult fw = factor_forward(r.factor, c);
  const Vector xb(r.reduced.num_vertices(), 0.7);
  const Vector x = factor_backward(r.factor, fw.top, xb);
  const Vertex center = 0;
  for (Vertex leaf = 1; leaf <= 4; ++leaf) {
    if (r.factor.survivor_map[leaf] != kNoVertex) continue;
    EXPECT_NEAR(3.0 * (x[leaf] - x[center]), c[leaf], 1e-14);
  }
}

TEST(FactorRoundTrip, SpectralExactness) {
  for (const WeightedGraph& g : random_graphs(50, 200, 900)) {
    const Vector c = ts::random_mean_zero(g.num_vertices(), g.num_edges());
    const Vector ref = ts::grounded_solve(g, c);
    EXPECT_LT(ts::relative_error(factor_solve(greedy_elimination(g), c), ref), 1e-10)
        << g.num_vertices() << " " << g.num_edges();
  }
}

TEST(GreedyElimination, SizeBounds) {
  std::vector<WeightedGraph> graphs = random_graphs(60, 150, 77);
  graphs.push_back(gen::grid2d(6, 9));
  graphs.push_back(gen::complete(7));
  graphs.push_back(gen::cycle(30));
  for (const WeightedGraph& g : graphs) {
    const std::size_t j = g.num_edges() + 1 - g.num_vertices();
    if (j < 2) continue;
    const EliminationResult r = greedy_elimination(g);
    EXPECT_LE(r.reduced.num_vertices(), 2 * j - 2);
    EXPECT_LE(r.reduced.num_edges(), 3 * j - 3);
  }
}

TEST(GreedyElimination, PivotsReplayOnTheGraph) {
  // replay every pivot on an explicit adjacency map: degree 1 or 2 at the
  // time, weights as recorded, every vertex either eliminated or a survivor
  for (const WeightedGraph& g : random_graphs(25, 80, 4242)) {
    const EliminationResult r = greedy_elimination(g);
    std::vector<std::map<Vertex, double>> adj(g.num_vertices());
    for (const Edge& e : g.edges()) adj[e.u][e.v] = adj[e.v][e.u] = e.w;
    std::vector<int> seen(g.num_vertices(), 0);
    for (const Pivot& p : r.factor.steps) {
      ++seen[p.v];
      ASSERT_EQ(adj[p.v].size(), p.degree_two() ? 2u : 1u);
      EXPECT_EQ(adj[p.v].at(p.u1), p.w1);
      if (p.degree_two()) {
        EXPECT_EQ(adj[p.v].at(p.u2), p.w2);
        adj[p.u1][p.u2] += p.merged_weight();
        adj[p.u2][p.u1] = adj[p.u1][p.u2];
      }
      for (const auto& [y, w] : adj[p.v]) adj[y].erase(p.v);
      adj[p.v].clear();
    }
    for (Vertex s : r.factor.survivors) ++seen[s];
    for (int k : seen) EXPECT_EQ(k, 1);
    for (std::size_t k = 0; k < r.factor.survivors.size(); ++k)
      EXPECT_EQ(r.factor.survivor_map[r.factor.survivors[k]], k);
    // replayed adjacency equals the reduced graph
    for (const Edge& e : r.reduced.edges())
      EXPECT_NEAR(adj[r.factor.survivors[e.u]].at(r.factor.survivors[e.v]), e.w, 1e-12 * e.w);
    std::size_t replay_edges = 0;
    for (const auto& a : adj) replay_edges += a.size();
    EXPECT_EQ(replay_edges, 2 * r.reduced.num_edges());
  }
}

TEST(GreedyElimination, Deterministic) {
  const WeightedGraph g = gen::random(300, 340, 8, 9.0);
  const EliminationResult a = greedy_elimination(g);
  const EliminationResult b = greedy_elimination(g);
  ASSERT_EQ(a.factor.steps.size(), b.factor.steps.size());
  for (std::size_t k = 0; k < a.factor.steps.size(); ++k) EXPECT_EQ(a.factor.steps[k].v, b.factor.steps[k].v);
  EXPECT_EQ(a.reduced, b.reduced);
}

TEST(GreedyElimination, Errors) {
  EXPECT_THROW(greedy_elimination(WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}})), DisconnectedGraphError);
  const EliminationResult r = greedy_elimination(gen::path(4));
  EXPECT_THROW(factor_forward(r.factor, Vector(3, 0.0)), DimensionError);
  EXPECT_THROW(factor_backward(r.factor, Vector(1, 0.0), Vector(1, 0.0)), DimensionError);
}
