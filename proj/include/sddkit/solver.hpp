#pragma once

// Recursive preconditioned Chebyshev over a preconditioner chain, and the
// top-level solve for SDD systems.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sddkit/chain.hpp"
#include "sddkit/chebyshev.hpp"
#include "sddkit/elimination.hpp"
#include "sddkit/error.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/oracle.hpp"
#include "sddkit/rng.hpp"
#include "sddkit/sdd.hpp"
#include "sddkit/vector_ops.hpp"

namespace sddkit {

/// Chebyshev bounds used at every non-terminal level, relative to a
/// preconditioner normalized so that its smallest eigenvalue is 1.
inline const double kLowerBound = 1.0 - 2.0 * std::exp(-2.0);
inline double upper_bound(double kappa) { return (1.0 + 2.0 * std::exp(-2.0)) * kappa; }

/// ceil(1.33 sqrt(kappa)): iterations a level runs when used as a preconditioner.
inline std::size_t inner_iterations(double kappa) {
  return static_cast<std::size_t>(std::ceil(1.33 * std::sqrt(std::max(1.0, kappa)) - 1e-12));
}

/// Per-level call and iteration counts gathered during a solve.
struct RecursionCounters {
  std::vector<std::uint64_t> calls;       // r_p_chebyshev invocations at level i
  std::vector<std::uint64_t> iterations;  // Chebyshev steps at level i
  std::uint64_t terminal_solves = 0;

  explicit RecursionCounters(std::size_t depth = 0) : calls(depth, 0), iterations(depth, 0) {}
};

Vector r_p_chebyshev(const PreconditionerChain& chain, std::size_t level, std::span<const double> b,
                     std::size_t t, RecursionCounters* counters = nullptr);

namespace detail {

/// Unscaled preconditioner of level i: eliminate, solve the next level with
/// its own iteration count (or exactly at the terminal), substitute back.
inline void level_preconditioner(const PreconditionerChain& chain, std::size_t level,
                                 std::span<const double> z, Vector& out,
                                 RecursionCounters* counters) {
  const ChainLevel& lvl = chain.levels[level];
  Vector zc(z.begin(), z.end());
  project_mean_zero(zc);
  ForwardResult fw = factor_forward(lvl.factor, zc);
  Vector xb;
  if (level + 1 < chain.levels.size()) {
    xb = r_p_chebyshev(chain, level + 1, fw.bottom, chain.levels[level + 1].bounds.inner_iterations,
                       counters);
  } else {
    xb = chain.terminal_solver.solve(fw.bottom);
    if (counters) ++counters->terminal_solves;
  }
  out = factor_backward(lvl.factor, fw.top, xb);
  project_mean_zero(out);
}

inline auto level_operator(const PreconditionerChain& chain, std::size_t level) {
  return [&g = chain.levels[level].a](std::span<const double> in, Vector& out) {
    laplacian_apply(g, in, out);
  };
}

inline auto scaled_preconditioner(const PreconditionerChain& chain, std::size_t level,
                                  RecursionCounters* counters) {
  const double scale = 1.0 / chain.levels[level].bounds.lambda_min;
  return [&chain, level, counters, scale](std::span<const double> in, Vector& out) {
    level_preconditioner(chain, level, in, out, counters);
    for (double& v : out) v *= scale;
  };
}

}  // namespace detail

/// Level i of the recursion: the exact terminal solve past the last level,
/// otherwise t preconditioned Chebyshev steps on A_i with bounds
/// [1 - 2e^-2, (1 + 2e^-2) kappa_i].
inline Vector r_p_chebyshev(const PreconditionerChain& chain, std::size_t level,
                            std::span<const double> b, std::size_t t,
                            RecursionCounters* counters) {
  if (level == chain.levels.size()) {
    if (counters) ++counters->terminal_solves;
    return chain.terminal_solver.solve(b);
  }
  if (level > chain.levels.size()) throw DimensionError("r_p_chebyshev: level past the chain");
  const ChainLevel& lvl = chain.levels[level];
  if (!lvl.bounds.ready) throw ValidationError("chain level " + std::to_string(level) + " has no bounds; calibrate first");
  require_same_size(lvl.a.num_vertices(), b.size(), "r_p_chebyshev");
  Vector rhs(b.begin(), b.end());
  project_mean_zero(rhs);
  if (counters) {
    ++counters->calls[level];
    counters->iterations[level] += t;
  }
  const ChebyshevParams params =
      ChebyshevParams::make(kLowerBound, upper_bound(lvl.bounds.kappa), t);
  Vector x = p_chebyshev(detail::level_operator(chain, level), rhs, params,
                         detail::scaled_preconditioner(chain, level, counters));
  project_mean_zero(x);
  return x;
}

struct SpectrumEstimate {
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  std::size_t steps = 0;
};

namespace detail {

inline std::pair<double, double> tridiagonal_extremes(const std::vector<double>& alphas,
                                                      const std::vector<double>& betas) {
  const auto k = static_cast<Eigen::Index>(alphas.size());
  Eigen::VectorXd diag(k), sub(std::max<Eigen::Index>(k - 1, 0));
  for (Eigen::Index j = 0; j < k; ++j) {
    diag(j) = 1.0 / alphas[j] + (j > 0 ? betas[j - 1] / alphas[j - 1] : 0.0);
    if (j + 1 < k) sub(j) = std::sqrt(betas[j]) / alphas[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Lanczos eigenvalue solve failed");
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace detail

/// Extreme eigenvalues of precond * A on the mean-zero subspace, from the
/// Lanczos matrix of preconditioned conjugate gradients started at start.
/// Stops early once both Ritz extremes settle (relative change below
/// settle_tol over 5 steps) or the residual vanishes.
template <class ApplyA, class Precond>
SpectrumEstimate lanczos_extremes(ApplyA&& apply_a, Precond&& precond,
                                  std::span<const double> start, std::size_t max_steps,
                                  double settle_tol = 1e-3) {
  const std::size_t n = start.size();
  Vector r(start.begin(), start.end()), z(n), p, ap(n);
  project_mean_zero(r);
  precond(std::span<const double>(r), z);
  p = z;
  double rz = dot(r, z);
  const double rz0 = rz;
  std::vector<double> alphas, betas;
  if (!(rz > 0.0)) throw NumericalError("preconditioner is not positive on the start vector");
  std::pair<double, double> last{0.0, 0.0};
  for (std::size_t k = 0; k < max_steps; ++k) {
    apply_a(std::span<const double>(p), ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    alphas.push_back(alpha);
    axpy(-alpha, ap, r);
    precond(std::span<const double>(r), z);
    const double rz_next = dot(r, z);
    if (!(rz_next > 1e-28 * rz0)) break;
    const double beta = rz_next / rz;
    betas.push_back(beta);
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_next;
    if (alphas.size() >= 10 && alphas.size() % 5 == 0) {
      betas.pop_back();
      const auto cur = detail::tridiagonal_extremes(alphas, betas);
      betas.push_back(beta);
      if (std::abs(cur.first - last.first) <= settle_tol * cur.first &&
          std::abs(cur.second - last.second) <= settle_tol * cur.second)
        break;
      last = cur;
    }
  }
  if (alphas.empty()) throw NumericalError("operator vanishes on the start vector");
  betas.resize(alphas.size() - 1);
  const auto ext = detail::tridiagonal_extremes(alphas, betas);
  return {ext.first, ext.second, alphas.size()};
}

/// Fills in every level's bounds from the bottom up. Level i's spectrum is
/// measured on its actual preconditioner, which already runs the calibrated
/// recursion below it.
inline void calibrate_chain(PreconditionerChain& chain, std::size_t lanczos_steps,
                            std::uint64_t seed) {
  for (std::size_t i = chain.levels.size(); i-- > 0;) {
    ChainLevel& lvl = chain.levels[i];
    Rng rng(derive_seed(seed, {i, 0xca11b}));
    Vector start(lvl.a.num_vertices());
    for (double& v : start) v = rng.uniform() - 0.5;
    const SpectrumEstimate est = lanczos_extremes(
        detail::level_operator(chain, i),
        [&chain, i](std::span<const double> in, Vector& out) {
          detail::level_preconditioner(chain, i, in, out, nullptr);
        },
        start, lanczos_steps);
    if (!(est.lambda_min > 0.0) || !std::isfinite(est.lambda_max))
      throw NumericalError("level " + std::to_string(i) + ": preconditioned spectrum estimate is not positive");
    lvl.bounds.lambda_min = est.lambda_min;
    lvl.bounds.lambda_max = est.lambda_max;
    lvl.bounds.kappa = std::max(1.0, est.lambda_max / est.lambda_min);
    lvl.bounds.inner_iterations = inner_iterations(lvl.bounds.kappa);
    lvl.bounds.ready = true;
  }
}

struct SolverOptions {
  ChainConfig chain;
  double c_t = 2.0;               // iteration cap ceil(c_t sqrt(kappa_1) ln(2/eps))
  double residual_factor = 0.1;   // stop when relative residual <= residual_factor * eps
  std::size_t lanczos_steps = 200;
  bool oracle_check = true;       // A-norm error against the dense solve when small enough
  std::size_t oracle_limit = oracle::oracle_limit();

  double residual_target(double eps) const { return residual_factor * eps; }
};

struct LevelReport {
  LevelStats stats;
  double kappa = 0.0;           // given to the sparsifier
  double measured_kappa = 0.0;  // estimated condition of the preconditioned level
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::size_t inner_iterations = 0;
  std::uint64_t calls = 0;
  std::uint64_t iterations = 0;
};

struct SolveReport {
  std::size_t n = 0;          // original dimension
  std::size_t reduced_n = 0;  // Laplacian dimension
  std::size_t m = 0;          // Laplacian edges
  std::string reduction = "identity";
  double eps = 0.0;
  double p = 0.0;
  double residual_target = 0.0;
  std::size_t iteration_cap = 0;
  std::vector<LevelReport> levels;
  std::size_t terminal_n = 0;
  std::size_t terminal_m = 0;
  std::uint64_t terminal_solves = 0;
  std::size_t iterations = 0;
  std::vector<double> residuals;  // relative 2-norm residual after each outer step
  double relative_residual = 0.0;
  std::optional<double> anorm_error;
  bool converged = false;
  double ms_reduce = 0.0, ms_build = 0.0, ms_calibrate = 0.0, ms_solve = 0.0, ms_oracle = 0.0;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

namespace detail {

using Clock = std::chrono::steady_clock;
inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Removes the all-ones component of b, warning when it was not negligible.
inline void project_rhs(Vector& b, std::vector<std::string>& warnings) {
  double scale = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  const double m = project_mean_zero(b);
  if (std::abs(m) > 1e-14 * std::max(scale, 1e-300))
    warnings.push_back("right-hand side is not orthogonal to the all-ones vector (mean " +
                       std::to_string(m) + "); solved for the projected right-hand side");
}

}  // namespace detail

/// A prepared solver for one connected graph Laplacian: the chain is built
/// and calibrated once and can serve any number of right-hand sides.
class LaplacianSolver {
 public:
  LaplacianSolver(const WeightedGraph& g, double p, SolverOptions opts = {})
      : opts_(std::move(opts)) {
    require_connected(g);
    auto t0 = detail::Clock::now();
    chain_ = build_chain(g, p, opts_.chain);
    ms_build_ = detail::ms_since(t0);
    t0 = detail::Clock::now();
    calibrate_chain(chain_, opts_.lanczos_steps, opts_.chain.seed);
    ms_calibrate_ = detail::ms_since(t0);
  }

  const PreconditionerChain& chain() const noexcept { return chain_; }
  const SolverOptions& options() const noexcept { return opts_; }
  double build_ms() const noexcept { return ms_build_; }
  double calibrate_ms() const noexcept { return ms_calibrate_; }

  /// Outer Chebyshev iterations on the top level until the relative residual
  /// reaches the target or the cap ceil(c_t sqrt(kappa_1) ln(2/eps)) is hit.
  SolveResult solve(std::span<const double> b_in, double eps) const {
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
    const WeightedGraph& g = chain_.top();
    require_same_size(g.num_vertices(), b_in.size(), "LaplacianSolver::solve");
    if (!all_finite(b_in)) throw ValidationError("right-hand side has non-finite entries");

    SolveResult res;
    SolveReport& rep = res.report;
    rep.n = rep.reduced_n = g.num_vertices();
    rep.m = g.num_edges();
    rep.eps = eps;
    rep.p = chain_.p;
    rep.seed = opts_.chain.seed;
    rep.residual_target = opts_.residual_target(eps);
    rep.ms_build = ms_build_;
    rep.ms_calibrate = ms_calibrate_;

    Vector b(b_in.begin(), b_in.end());
    detail::project_rhs(b, rep.warnings);
    const double bnorm = norm2(b);
    RecursionCounters counters(chain_.depth());
    const auto t0 = detail::Clock::now();
    Vector ax(b.size());
    auto relative_residual = [&](const Vector& x) {
      laplacian_apply(g, x, ax);
      double s = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) s += (b[i] - ax[i]) * (b[i] - ax[i]);
      return bnorm > 0.0 ? std::sqrt(s) / bnorm : std::sqrt(s);
    };

    if (bnorm == 0.0) {
      res.x.assign(b.size(), 0.0);
      rep.converged = true;
    } else if (chain_.depth() == 0) {
      res.x = chain_.terminal_solver.solve(b);
      ++counters.terminal_solves;
      rep.relative_residual = relative_residual(res.x);
      rep.residuals.push_back(rep.relative_residual);
      rep.converged = rep.relative_residual <= rep.residual_target;
    } else {
      const double kappa1 = chain_.levels[0].bounds.kappa;
      rep.iteration_cap = static_cast<std::size_t>(
          std::ceil(opts_.c_t * std::sqrt(kappa1) * std::log(2.0 / eps)));
      rep.iteration_cap = std::max<std::size_t>(rep.iteration_cap, 1);
      ChebyshevIteration it(detail::level_operator(chain_, 0),
                            detail::scaled_preconditioner(chain_, 0, &counters), b, kLowerBound,
                            upper_bound(kappa1));
      ++counters.calls[0];
      while (it.steps() < rep.iteration_cap) {
        it.step();
        ++counters.iterations[0];
        const double rr = relative_residual(it.x());
        rep.residuals.push_back(rr);
        if (rr <= rep.residual_target) {
          rep.converged = true;
          break;
        }
      }
      res.x = it.take_x();
      project_mean_zero(res.x);
    }
    rep.iterations = counters.iterations.empty() ? 0 : counters.iterations[0];
    rep.relative_residual = relative_residual(res.x);
    rep.ms_solve = detail::ms_since(t0);
    if (!rep.converged)
      rep.warnings.push_back("iteration cap " + std::to_string(rep.iteration_cap) +
                             " reached at relative residual " + std::to_string(rep.relative_residual));

    for (std::size_t i = 0; i < chain_.depth(); ++i) {
      const ChainLevel& lvl = chain_.levels[i];
      LevelReport lr;
      lr.stats = lvl.stats;
      lr.kappa = lvl.kappa;
      lr.measured_kappa = lvl.bounds.kappa;
      lr.lambda_min = lvl.bounds.lambda_min;
      lr.lambda_max = lvl.bounds.lambda_max;
      lr.inner_iterations = lvl.bounds.inner_iterations;
      lr.calls = counters.calls[i];
      lr.iterations = counters.iterations[i];
      rep.levels.push_back(lr);
    }
    rep.terminal_n = chain_.terminal.num_vertices();
    rep.terminal_m = chain_.terminal.num_edges();
    rep.terminal_solves = counters.terminal_solves;

    if (opts_.oracle_check && g.num_vertices() <= opts_.oracle_limit) {
      const auto t1 = detail::Clock::now();
      rep.anorm_error = oracle::relative_anorm_error(g, b, res.x);
      rep.ms_oracle = detail::ms_since(t1);
    }
    return res;
  }

 private:
  SolverOptions opts_;
  PreconditionerChain chain_;
  double ms_build_ = 0.0;
  double ms_calibrate_ = 0.0;
};

/// Solves the Laplacian system L_g x = b (b projected onto the mean-zero
/// subspace if needed).
inline SolveResult solve_laplacian(const WeightedGraph& g, std::span<const double> b, double eps,
                                   double p, const SolverOptions& opts = {}) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("p must lie in (0, 1)");
  LaplacianSolver solver(g, p, opts);
  return solver.solve(b, eps);
}

/// Solves A x = b for an SDD matrix through its Laplacian reduction.
inline SolveResult solve(const SddMatrix& a, std::span<const double> b, double eps, double p,
                         const SolverOptions& opts = {}) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("p must lie in (0, 1)");
  require_same_size(a.size(), b.size(), "solve (rhs)");
  const auto t0 = detail::Clock::now();
  LaplacianReduction red = sdd_to_laplacian(a, b);
  const double ms_reduce = detail::ms_since(t0);
  SolveResult res = solve_laplacian(red.graph, red.rhs, eps, p, opts);
  res.x = red.map.back_map(res.x);
  res.report.n = a.size();
  res.report.reduction = red.map.kind == ReductionKind::identity ? "identity" : "double-cover";
  res.report.ms_reduce = ms_reduce;
  return res;
}

}  // namespace sddkit
