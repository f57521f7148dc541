#pragma once

// Preconditioner chain A_1, B_1, A_2, ..., A_d: each B_i is an incremental
// sparsifier of A_i and A_{i+1} is what greedy elimination leaves of B_i.
// The last graph is small enough to factor densely.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sddkit/elimination.hpp"
#include "sddkit/error.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/lowstretch.hpp"
#include "sddkit/oracle.hpp"
#include "sddkit/rng.hpp"
#include "sddkit/sparsify.hpp"

namespace sddkit {

enum class KappaMode { practical, theory };

inline const char* to_string(KappaMode m) {
  return m == KappaMode::practical ? "practical" : "theory";
}

inline KappaMode parse_kappa_mode(const std::string& s) {
  if (s == "practical") return KappaMode::practical;
  if (s == "theory") return KappaMode::theory;
  throw ValidationError("unknown kappa mode '" + s + "'");
}

/// Oversampling constant used inside the chain. Much smaller than the
/// standalone sparsifier default: at C_s of a few units every off-tree edge
/// is drawn and elimination has nothing to remove.
inline constexpr double kChainOversampling = 0.003;

struct ChainConfig {
  KappaMode kappa_mode = KappaMode::practical;
  double kappa = 20.0;    // practical mode
  double c_kappa = 1.0;   // theory mode: c_kappa (log2 n)^4 max(1, ln 1/p)
  double c_r = 1.0;
  double cs = kChainOversampling;
  std::size_t direct_threshold = 64;
  std::size_t max_retries = 3;
  std::size_t max_escalations = 12;
  double kappa_growth = 2.0;
  SparsifyMode mode = SparsifyMode::keep_tree;
  LowStretchOptions tree;
  std::uint64_t seed = 0;
};

struct LevelStats {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t b_edges = 0;
  std::size_t next_n = 0;
  std::size_t next_m = 0;
  double xi = 0.0;
  std::uint64_t q = 0;
  double t = 0.0;
  double t_prime = 0.0;
  double tree_stretch = 0.0;
  TreeConstruction construction = TreeConstruction::star_decomposition;
  std::uint64_t off_tree_picks = 0;
  std::size_t retries = 0;      // failed attempts at the final kappa
  std::size_t escalations = 0;  // times kappa was raised
  std::uint64_t seed = 0;       // seed of the accepted attempt
  double ratio = 0.0;           // m_i / m_{i+1}
};

/// Spectral data filled in by the solver before the chain is used.
struct LevelBounds {
  bool ready = false;
  double lambda_min = 1.0;       // estimated extremes of (preconditioner * A_i)
  double lambda_max = 1.0;
  double kappa = 1.0;            // lambda_max / lambda_min
  std::size_t inner_iterations = 1;  // ceil(1.33 sqrt(kappa)) when called from above
};

struct ChainLevel {
  WeightedGraph a;
  WeightedGraph b;
  EliminationFactor factor;
  double kappa = 1.0;  // kappa handed to the sparsifier
  LevelStats stats;
  LevelBounds bounds;
};

/// Dense solver for the last graph: (L + J/n)^{-1} agrees with L^+ on
/// mean-zero vectors of a connected graph.
class TerminalSolver {
 public:
  TerminalSolver() = default;
  explicit TerminalSolver(const WeightedGraph& g) : n_(g.num_vertices()) {
    require_connected(g);
    if (n_ <= 1) return;
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd l = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n_));
    for (const Edge& e : g.edges()) {
      l(e.u, e.u) += e.w;
      l(e.v, e.v) += e.w;
      l(e.u, e.v) -= e.w;
      l(e.v, e.u) -= e.w;
    }
    llt_.compute(l);
    if (llt_.info() != Eigen::Success) throw NumericalError("terminal factorization failed");
  }

  std::size_t size() const noexcept { return n_; }

  /// L^+ b after projecting b onto the mean-zero subspace.
  Vector solve(std::span<const double> b) const {
    require_same_size(n_, b.size(), "TerminalSolver::solve");
    Vector x(b.begin(), b.end());
    if (n_ <= 1) return Vector(n_, 0.0);
    project_mean_zero(x);
    Eigen::Map<Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(n_));
    v = llt_.solve(v);
    project_mean_zero(x);
    return x;
  }

 private:
  std::size_t n_ = 0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct PreconditionerChain {
  std::vector<ChainLevel> levels;
  WeightedGraph terminal;
  TerminalSolver terminal_solver;
  double c_r = 1.0;
  double p = 0.5;
  ChainConfig config;

  std::size_t depth() const noexcept { return levels.size(); }
  std::size_t total_retries() const noexcept {
    std::size_t r = 0;
    for (const auto& l : levels) r += l.stats.retries;
    return r;
  }
  std::size_t total_escalations() const noexcept {
    std::size_t r = 0;
    for (const auto& l : levels) r += l.stats.escalations;
    return r;
  }
  /// The graph the chain was built for.
  const WeightedGraph& top() const noexcept { return levels.empty() ? terminal : levels[0].a; }
};

namespace detail {

/// xi_i from the failure probability p: p / (2 log2 n) while m_i > log2 n,
/// otherwise p / (2 log2 log2 n).
inline double chain_xi(double p, std::size_t n_top, std::size_t m_i) {
  const double lg = std::log2(std::max<double>(4.0, static_cast<double>(n_top)));
  const double denom =
      static_cast<double>(m_i) > lg ? 2.0 * lg : 2.0 * std::max(1.0, std::log2(lg));
  return std::min(0.5, p / denom);
}

inline double chain_kappa(const ChainConfig& cfg, std::size_t n_i, double p) {
  if (cfg.kappa_mode == KappaMode::practical) return cfg.kappa;
  const double lg = std::log2(std::max<double>(2.0, static_cast<double>(n_i)));
  return std::max(1.0, cfg.c_kappa * std::pow(lg, 4) * std::max(1.0, std::log(1.0 / p)));
}

}  // namespace detail

/// Required reduction ratio c_r sqrt(3 kappa).
inline double required_ratio(double c_r, double kappa) { return c_r * std::sqrt(3.0 * kappa); }

/// Builds the chain. Each level is retried with fresh randomness when the
/// edge reduction falls short of c_r sqrt(3 kappa); after max_retries failed
/// attempts kappa is multiplied by kappa_growth.
inline PreconditionerChain build_chain(const WeightedGraph& a, double p, const ChainConfig& cfg = {}) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("p must lie in (0, 1)");
  if (!(cfg.c_r >= 0.0) || !(cfg.kappa_growth > 1.0) || !(cfg.kappa >= 1.0))
    throw ValidationError("chain config: need c_r >= 0, kappa >= 1, kappa_growth > 1");
  require_connected(a);

  PreconditionerChain chain;
  chain.c_r = cfg.c_r;
  chain.p = p;
  chain.config = cfg;
  const std::size_t n_top = a.num_vertices();

  WeightedGraph current = a;
  while (current.num_edges() > cfg.direct_threshold) {
    const std::size_t level = chain.levels.size();
    const std::size_t m_i = current.num_edges();
    ChainLevel lvl;
    lvl.stats.n = current.num_vertices();
    lvl.stats.m = m_i;
    lvl.stats.xi = detail::chain_xi(p, n_top, m_i);
    const LowStretchResult tree = low_stretch_tree(current, cfg.tree);
    SparsifyOptions sopts;
    sopts.mode = cfg.mode;
    sopts.cs = cfg.cs;
    sopts.tree = cfg.tree;

    double kappa = detail::chain_kappa(cfg, current.num_vertices(), p);
    bool accepted = false;
    for (std::size_t esc = 0; esc <= cfg.max_escalations && !accepted; ++esc) {
      // the sparsifier needs kappa < m
      const double cap = std::max(1.0, static_cast<double>(m_i) - 1.0);
      kappa = std::min(kappa, cap);
      for (std::size_t attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        const std::uint64_t seed = derive_seed(cfg.seed, {level, esc, attempt});
        Rng rng(seed);
        SparsifyResult h = incremental_sparsify(current, kappa, lvl.stats.xi, rng, sopts, &tree);
        if (!is_connected(h.graph)) {
          if (cfg.mode == SparsifyMode::keep_tree)
            throw ChainBuildError("keep-tree sparsifier returned a disconnected graph");
          continue;
        }
        EliminationResult el = greedy_elimination(h.graph);
        const std::size_t m_next = el.reduced.num_edges();
        const double ratio = m_next == 0 ? std::numeric_limits<double>::infinity()
                                         : static_cast<double>(m_i) / static_cast<double>(m_next);
        if (m_next >= m_i || ratio < required_ratio(cfg.c_r, kappa)) continue;

        lvl.a = std::move(current);
        lvl.b = std::move(h.graph);
        lvl.factor = std::move(el.factor);
        lvl.kappa = kappa;
        lvl.stats.b_edges = lvl.b.num_edges();
        lvl.stats.next_n = el.reduced.num_vertices();
        lvl.stats.next_m = m_next;
        lvl.stats.q = h.spec.q;
        lvl.stats.t = h.spec.t;
        lvl.stats.t_prime = h.off_tree_weight;
        lvl.stats.tree_stretch = h.tree_stretch;
        lvl.stats.construction = h.construction;
        lvl.stats.off_tree_picks = h.off_tree_picks;
        lvl.stats.retries = attempt;
        lvl.stats.escalations = esc;
        lvl.stats.seed = seed;
        lvl.stats.ratio = ratio;
        current = std::move(el.reduced);
        accepted = true;
        break;
      }
      if (!accepted) {
        if (kappa >= cap)
          throw ChainBuildError("level " + std::to_string(level) + ": no reduction by c_r sqrt(3 kappa) even at kappa = " +
                                std::to_string(kappa) + " (m = " + std::to_string(m_i) + ")");
        kappa *= cfg.kappa_growth;
      }
    }
    if (!accepted)
      throw ChainBuildError("level " + std::to_string(level) + ": retry budget exhausted");
    chain.levels.push_back(std::move(lvl));
  }
  chain.terminal = std::move(current);
  chain.terminal_solver = TerminalSolver(chain.terminal);
  return chain;
}

struct LevelValidation {
  std::size_t level = 0;
  double ratio = 0.0;
  double required_ratio = 0.0;
  bool ratio_ok = false;
  bool factor_ok = false;
  bool sandwich_checked = false;
  bool sandwich_ok = false;
  double lambda_lo = 0.0;  // extremes of L_A^+ L_B; want [1, 3 kappa]
  double lambda_hi = 0.0;
  double kappa = 0.0;
};

struct ChainValidation {
  std::vector<LevelValidation> levels;
  bool ratios_ok = true;
  bool factors_ok = true;
  bool sandwiches_ok = true;  // over the levels that were checked
  bool ok() const noexcept { return ratios_ok && factors_ok && sandwiches_ok; }
};

/// Re-checks every level: reduction ratio, that eliminating B_i reproduces
/// A_{i+1} and the recorded factor, and, for n_i <= oracle_limit, the
/// sandwich A_i <= B_i <= 3 kappa_i A_i.
inline ChainValidation validate_chain(const PreconditionerChain& chain,
                                      std::size_t oracle_limit = oracle::oracle_limit()) {
  constexpr double kSlack = 1e-9;
  ChainValidation out;
  for (std::size_t i = 0; i < chain.levels.size(); ++i) {
    const ChainLevel& lvl = chain.levels[i];
    const WeightedGraph& next = i + 1 < chain.levels.size() ? chain.levels[i + 1].a : chain.terminal;
    LevelValidation v;
    v.level = i;
    v.kappa = lvl.kappa;
    v.ratio = next.num_edges() == 0
                  ? std::numeric_limits<double>::infinity()
                  : static_cast<double>(lvl.a.num_edges()) / static_cast<double>(next.num_edges());
    v.required_ratio = required_ratio(chain.c_r, lvl.kappa);
    v.ratio_ok = v.ratio >= v.required_ratio && next.num_edges() < lvl.a.num_edges();

    const bool b_spans = lvl.b.num_vertices() == lvl.a.num_vertices() && is_connected(lvl.b);
    if (b_spans) {
      const EliminationResult el = greedy_elimination(lvl.b);
      v.factor_ok = el.reduced == next && el.factor.survivors == lvl.factor.survivors &&
                    el.factor.steps.size() == lvl.factor.steps.size();
    }

    if (lvl.a.num_vertices() <= oracle_limit && b_spans) {
      const oracle::GeneralizedBounds gb = oracle::generalized_bounds(
          oracle::dense_laplacian(lvl.b, oracle_limit), oracle::dense_laplacian(lvl.a, oracle_limit));
      v.sandwich_checked = true;
      v.lambda_lo = gb.lambda_min;
      v.lambda_hi = gb.lambda_max;
      v.sandwich_ok = gb.lambda_min >= 1.0 - kSlack && gb.lambda_max <= 3.0 * lvl.kappa + kSlack;
    }
    out.ratios_ok = out.ratios_ok && v.ratio_ok;
    out.factors_ok = out.factors_ok && v.factor_ok;
    if (v.sandwich_checked) out.sandwiches_ok = out.sandwiches_ok && v.sandwich_ok;
    out.levels.push_back(v);
  }
  return out;
}

}  // namespace sddkit
