#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sddkit/generators.hpp"
#include "sddkit/solver.hpp"
#include "support.hpp"

using namespace sddkit;
namespace ts = testing_support;

namespace {

SolverOptions seeded(std::uint64_t seed) {
  SolverOptions opts;
  opts.chain.seed = seed;
  return opts;
}

double anorm_error(const WeightedGraph& g, const Vector& x, const Vector& ref) {
  Vector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - ref[i];
  return ts::anorm(g, d) / ts::anorm(g, ref);
}

}  // namespace

TEST(RPChebyshev, TreeChainIsNearlyExact) {
  const WeightedGraph g = gen::random(500, 499, 4, 30.0);
  PreconditionerChain chain = build_chain(g, 0.1);
  ASSERT_EQ(chain.depth(), 1u);
  calibrate_chain(chain, 200, 1);
  const Vector b = ts::random_mean_zero(500, 2);
  const Vector ref = ts::grounded_solve(g, b);
  const std::size_t t_max = inner_iterations(chain.levels[0].kappa);
  EXPECT_EQ(t_max, static_cast<std::size_t>(std::ceil(1.33 * std::sqrt(20.0))));
  std::size_t first = 0;
  for (std::size_t t = 1; t <= t_max && first == 0; ++t) {
    RecursionCounters counters(1);
    const Vector x = r_p_chebyshev(chain, 0, b, t, &counters);
    EXPECT_EQ(counters.iterations[0], t);
    EXPECT_EQ(counters.terminal_solves, t);
    if (anorm_error(g, x, ref) <= 1e-8) first = t;
  }
  EXPECT_GE(first, 1u);
}

TEST(RPChebyshev, LastLevelIsExactSolve) {
  const WeightedGraph g = gen::grid2d(12, 12);
  PreconditionerChain chain = build_chain(g, 0.1, seeded(3).chain);
  calibrate_chain(chain, 200, 3);
  const std::size_t d = chain.depth();
  const WeightedGraph& last = d == 0 ? g : chain.terminal;
  const Vector b = ts::random_mean_zero(last.num_vertices(), 5);
  RecursionCounters counters(d);
  const Vector x = r_p_chebyshev(chain, d, b, 7, &counters);
  EXPECT_EQ(counters.terminal_solves, 1u);
  for (auto it : counters.iterations) EXPECT_EQ(it, 0u);
  if (last.num_vertices() > 1) {
    EXPECT_LT(ts::relative_error(x, ts::grounded_solve(last, b)), 1e-10);
  }
  EXPECT_THROW(r_p_chebyshev(chain, d + 1, b, 1), DimensionError);
}

TEST(RPChebyshev, UncalibratedChainRejected) {
  const PreconditionerChain chain = build_chain(gen::grid2d(12, 12), 0.1);
  ASSERT_GE(chain.depth(), 1u);
  EXPECT_THROW(r_p_chebyshev(chain, 0, Vector(144, 0.0), 3), ValidationError);
}

TEST(Solve, GridTwelveFullRecursion) {
  const WeightedGraph g = gen::grid2d(12, 12);
  const Vector b = ts::random_mean_zero(144, 11);
  const SolveResult r = solve_laplacian(g, b, 1e-8, 0.1, seeded(4));
  EXPECT_GE(r.report.levels.size(), 1u);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(anorm_error(g, r.x, ts::grounded_solve(g, b)), 1e-8);
  ASSERT_TRUE(r.report.anorm_error.has_value());
  EXPECT_LE(*r.report.anorm_error, 1e-8);
}

TEST(Solve, PathTenUnitDipole) {
  const WeightedGraph g = gen::path(10);
  Vector b(10, 0.0);
  b[0] = 1.0;
  b[9] = -1.0;
  const SolveResult r = solve(SddMatrix::laplacian_of(g), b, 1e-8, 0.1, seeded(1));
  EXPECT_EQ(r.report.reduction, "identity");
  EXPECT_LE(anorm_error(g, r.x, ts::grounded_solve(g, b)), 1e-8);
  // closed form: potential drops by 1 across each unit edge
  for (std::size_t i = 0; i + 1 < 10; ++i) EXPECT_NEAR(r.x[i] - r.x[i + 1], 1.0, 1e-7);
}

TEST(Solve, ConstantRightHandSideWarns) {
  const WeightedGraph g = gen::grid2d(10, 10);
  const Vector ones(100, 1.0);
  const SolveResult r = solve_laplacian(g, ones, 1e-6, 0.1);
  ASSERT_FALSE(r.report.warnings.empty());
  EXPECT_NE(r.report.warnings[0].find("all-ones"), std::string::npos);
  for (double v : r.x) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(r.report.converged);

  Vector shifted = ts::random_mean_zero(100, 8);
  const Vector ref = ts::grounded_solve(g, shifted);
  for (double& v : shifted) v += 3.0;
  const SolveResult s = solve_laplacian(g, shifted, 1e-8, 0.1);
  EXPECT_FALSE(s.report.warnings.empty());
  EXPECT_LE(anorm_error(g, s.x, ref), 1e-8);
}

TEST(Solve, TwoByTwoSdd) {
  const SddMatrix a = SddMatrix::from_full(2, {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}});
  const SolveResult r = solve(a, Vector{1.0, 0.0}, 1e-8, 0.1);
  EXPECT_EQ(r.report.reduction, "double-cover");
  EXPECT_EQ(r.report.reduced_n, 4u);
  EXPECT_NEAR(r.x[0], 2.0 / 3.0, 1e-8);
  EXPECT_NEAR(r.x[1], 1.0 / 3.0, 1e-8);
}

TEST(Solve, SddRoundTripWithChain) {
  // large enough that the double cover gets a real chain
  const SddMatrix a = ts::random_sdd(150, 5);
  const Vector b = ts::random_vector(150, 6);
  const SolveResult r = solve(a, b, 1e-8, 0.1, seeded(2));
  EXPECT_GE(r.report.levels.size(), 1u);
  const Eigen::MatrixXd m = ts::dense_matrix(a);
  const Eigen::VectorXd ref = m.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), 150));
  const Vector refv(ref.data(), ref.data() + 150);
  EXPECT_LT(ts::relative_error(r.x, refv), 1e-8);
}

TEST(Solve, ResidualImprovesOverWindows) {
  const WeightedGraph g = gen::grid2d(40, 40);
  const SolveResult r = solve_laplacian(g, ts::random_mean_zero(1600, 3), 1e-10, 0.1, seeded(6));
  const auto& res = r.report.residuals;
  ASSERT_GE(res.size(), 20u);
  double best = res[0];
  for (std::size_t start = 1; start + 10 <= res.size(); start += 10) {
    const double window = *std::min_element(res.begin() + static_cast<long>(start),
                                            res.begin() + static_cast<long>(start + 10));
    EXPECT_LE(window, best) << "window at " << start;
    best = std::min(best, window);
  }
}

TEST(Solve, AnormContractOnCorpus) {
  std::vector<ts::NamedGraph> corpus = ts::small_corpus();
  corpus.push_back({"grid20", gen::grid2d(20, 20)});
  corpus.push_back({"random300", gen::random(300, 900, 12, 100.0)});
  corpus.push_back({"cycle400", gen::cycle(400)});
  corpus.push_back({"complete25", gen::complete(25)});
  for (double eps : {1e-4, 1e-8}) {
    for (const auto& [name, g] : corpus) {
      const Vector b = ts::random_mean_zero(g.num_vertices(), g.num_edges());
      const SolveResult r = solve_laplacian(g, b, eps, 0.1, seeded(9));
      EXPECT_LE(anorm_error(g, r.x, ts::grounded_solve(g, b)), eps) << name << " eps " << eps;
      EXPECT_TRUE(r.report.converged) << name;
    }
  }
}

TEST(Solve, RecursionBudget) {
  const WeightedGraph g = gen::grid2d(50, 50);
  const SolveResult r = solve_laplacian(g, ts::random_mean_zero(2500, 4), 1e-6, 0.1, seeded(8));
  const auto& lv = r.report.levels;
  ASSERT_GE(lv.size(), 2u);
  EXPECT_EQ(lv[0].calls, 1u);
  EXPECT_EQ(lv[0].iterations, r.report.iterations);
  for (std::size_t i = 0; i + 1 < lv.size(); ++i) {
    EXPECT_EQ(lv[i + 1].calls, lv[i].iterations);
    EXPECT_EQ(lv[i + 1].iterations, lv[i].iterations * lv[i + 1].inner_iterations);
    EXPECT_EQ(lv[i + 1].inner_iterations,
              static_cast<std::size_t>(std::ceil(1.33 * std::sqrt(lv[i + 1].measured_kappa))));
  }
  EXPECT_EQ(r.report.terminal_solves, lv.back().iterations);
}

TEST(Solve, BitwiseDeterministic) {
  const WeightedGraph g = gen::random(2000, 6000, 3, 10.0);
  const Vector b = ts::random_mean_zero(2000, 1);
  const SolveResult a = solve_laplacian(g, b, 1e-6, 0.1, seeded(77));
  const SolveResult c = solve_laplacian(g, b, 1e-6, 0.1, seeded(77));
  EXPECT_EQ(a.x, c.x);
  EXPECT_EQ(a.report.residuals, c.report.residuals);
  EXPECT_EQ(a.report.iterations, c.report.iterations);
  ASSERT_EQ(a.report.levels.size(), c.report.levels.size());
  for (std::size_t i = 0; i < a.report.levels.size(); ++i) {
    EXPECT_EQ(a.report.levels[i].lambda_max, c.report.levels[i].lambda_max);
    EXPECT_EQ(a.report.levels[i].stats.seed, c.report.levels[i].stats.seed);
  }
}

TEST(Solve, IterationCapIsFlaggedNotFatal) {
  SolverOptions opts = seeded(1);
  opts.c_t = 1e-3;
  const WeightedGraph g = gen::grid2d(30, 30);
  const SolveResult r = solve_laplacian(g, ts::random_mean_zero(900, 2), 1e-10, 0.1, opts);
  EXPECT_EQ(r.report.iteration_cap, 1u);
  EXPECT_EQ(r.report.iterations, 1u);
  EXPECT_FALSE(r.report.converged);
  ASSERT_FALSE(r.report.warnings.empty());
  EXPECT_NE(r.report.warnings.back().find("iteration cap"), std::string::npos);
}

TEST(Solve, PreparedSolverServesManyRightHandSides) {
  const WeightedGraph g = gen::grid2d(25, 25);
  const LaplacianSolver solver(g, 0.1, seeded(5));
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Vector b = ts::random_mean_zero(625, s);
    EXPECT_LE(anorm_error(g, solver.solve(b, 1e-8).x, ts::grounded_solve(g, b)), 1e-8);
  }
}

TEST(Solve, Errors) {
  const WeightedGraph g = gen::path(5);
  EXPECT_THROW(solve_laplacian(g, Vector(5, 0.0), 0.0, 0.1), ValidationError);
  EXPECT_THROW(solve_laplacian(g, Vector(5, 0.0), 1e-6, 1.0), ValidationError);
  EXPECT_THROW(solve_laplacian(g, Vector(4, 0.0), 1e-6, 0.1), DimensionError);
  EXPECT_THROW(solve_laplacian(WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}}), Vector(4, 0.0), 1e-6, 0.1), DisconnectedGraphError);
  Vector bad(5, 0.0);
  bad[2] = std::nan("");
  EXPECT_THROW(solve_laplacian(g, bad, 1e-6, 0.1), ValidationError);
}
