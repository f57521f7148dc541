// sddkit command-line driver: solve, sparsify, stretch, bench, verify, split.
//
// Exit codes: 0 success, 1 validation or usage error, 2 solve finished
// without meeting its residual target.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "report_json.hpp"
#include "sddkit/sddkit.hpp"

namespace {

using nlohmann::json;
using namespace sddkit;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNotConverged = 2;

struct InputOptions {
  std::string matrix;
  std::string graph;
};

struct RunConfig {
  InputOptions input;
  std::string rhs = "random:1";
  std::string report;
  std::string solution;
  std::string output;
  std::string stats;
  double eps = 1e-8;
  double p = 0.1;
  double kappa = 20.0;
  std::string kappa_mode = "practical";
  double xi = 0.1;
  double cs = kDefaultOversampling;
  double chain_cs = kChainOversampling;
  double c_r = 1.0;
  double c_t = 2.0;
  std::size_t threshold = 64;
  std::string mode = "keep-tree";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool verify = false;
  std::string family = "grid2d";
  std::string sizes = "1e3,1e4,1e5";
  std::string prefix = "component";
};

json config_json(const RunConfig& c, const std::string& subcommand) {
  return {{"subcommand", subcommand},
          {"matrix", c.input.matrix},
          {"graph", c.input.graph},
          {"rhs", c.rhs},
          {"eps", c.eps},
          {"p", c.p},
          {"kappa", c.kappa},
          {"kappa_mode", c.kappa_mode},
          {"xi", c.xi},
          {"cs", c.cs},
          {"chain_cs", c.chain_cs},
          {"c_r", c.c_r},
          {"c_t", c.c_t},
          {"threshold", c.threshold},
          {"mode", c.mode},
          {"seed", c.seed},
          {"oracle_limit", oracle::oracle_limit()}};
}

void resolve_seed(RunConfig& c) {
  if (c.seed_given) return;
  std::random_device rd;
  c.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void add_input(CLI::App* cmd, InputOptions& in) {
  auto* m = cmd->add_option("--matrix", in.matrix, "Matrix Market file (SDD matrix)");
  auto* g = cmd->add_option("--graph", in.graph, "edge list file (n m header, then u v w)");
  m->excludes(g);
}

void require_input(const InputOptions& in) {
  if (in.matrix.empty() && in.graph.empty())
    throw ValidationError("one of --matrix or --graph is required");
}

/// The input as a Laplacian graph. Matrices must already be Laplacians.
WeightedGraph load_graph(const InputOptions& in) {
  require_input(in);
  if (!in.graph.empty()) return io::load_edge_list(in.graph);
  const SddMatrix a = io::load_matrix_market(in.matrix);
  if (!a.is_laplacian())
    throw ValidationError(in.matrix + ": matrix is not a graph Laplacian (use solve for general SDD input)");
  return sdd_to_laplacian(a, Vector(a.size(), 0.0)).graph;
}

Vector load_rhs(const std::string& spec, std::size_t n) {
  if (spec.rfind("random:", 0) == 0) {
    std::uint64_t s = 0;
    try {
      s = std::stoull(spec.substr(7));
    } catch (const std::exception&) {
      throw ValidationError("bad --rhs '" + spec + "', expected random:<seed>");
    }
    Rng rng(s);
    Vector b(n);
    for (double& v : b) v = rng.uniform() - 0.5;
    return b;
  }
  std::ifstream in(spec);
  if (!in) throw ParseError("cannot open '" + spec + "' for reading");
  Vector b;
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#' || tok[0] == '%') {
      std::getline(in, tok);
      continue;
    }
    try {
      b.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ParseError(spec + ": bad number '" + tok + "'");
    }
  }
  if (b.size() != n)
    throw DimensionError(spec + ": right-hand side has " + std::to_string(b.size()) +
                         " entries, matrix has " + std::to_string(n));
  return b;
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw ParseError("failed writing '" + path + "'");
}

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.chain.kappa_mode = parse_kappa_mode(c.kappa_mode);
  o.chain.kappa = c.kappa;
  o.chain.cs = c.chain_cs;
  o.chain.c_r = c.c_r;
  o.chain.direct_threshold = c.threshold;
  o.chain.mode = parse_sparsify_mode(c.mode);
  o.chain.seed = c.seed;
  o.c_t = c.c_t;
  return o;
}

int run_solve(RunConfig& c) {
  require_input(c.input);
  resolve_seed(c);
  SddMatrix a = c.input.matrix.empty()
                    ? SddMatrix::laplacian_of(io::load_edge_list(c.input.graph))
                    : io::load_matrix_market(c.input.matrix);
  const Vector b = load_rhs(c.rhs, a.size());
  const SolveResult res = solve(a, b, c.eps, c.p, solver_options(c));
  json report = cli::solve_report_json(res.report);
  report["config"] = config_json(c, "solve");
  if (!c.solution.empty()) {
    std::ofstream out(c.solution);
    if (!out) throw ParseError("cannot open '" + c.solution + "' for writing");
    for (double v : res.x) out << io::detail::format_double(v) << "\n";
  }
  write_json(report, c.report);
  if (!c.report.empty())
    std::cerr << "solve: " << res.report.iterations << " iterations, relative residual "
              << res.report.relative_residual << (res.report.converged ? "" : " (NOT converged)")
              << "\n";
  return res.report.converged ? kExitOk : kExitNotConverged;
}

int run_sparsify(RunConfig& c) {
  resolve_seed(c);
  const WeightedGraph g = load_graph(c.input);
  SparsifyOptions o;
  o.mode = parse_sparsify_mode(c.mode);
  o.cs = c.cs;
  Rng rng(c.seed);
  const SparsifyResult h = incremental_sparsify(g, c.kappa, c.xi, rng, o);
  json stats = cli::sparsify_stats_json(h, g);
  stats["kappa"] = c.kappa;
  stats["config"] = config_json(c, "sparsify");
  if (c.verify) {
    if (g.num_vertices() > oracle::oracle_limit()) {
      stats["verify"] = {{"skipped", "n exceeds the oracle limit"}};
    } else if (!is_connected(h.graph)) {
      stats["verify"] = {{"connected", false}};
    } else {
      const auto b = oracle::generalized_bounds(g, h.graph);
      stats["verify"] = {{"lambda_min", b.lambda_min},
                         {"lambda_max", b.lambda_max},
                         {"measured_kappa", b.condition()},
                         {"bound", 3.0 * c.kappa},
                         {"ok", b.condition() <= 3.0 * c.kappa * (1 + 1e-9)}};
    }
  }
  if (!c.output.empty()) io::store_edge_list(h.graph, c.output);
  write_json(stats, c.stats);
  return kExitOk;
}

int run_stretch(RunConfig& c) {
  const WeightedGraph g = load_graph(c.input);
  const LowStretchResult lst = low_stretch_tree(g);
  const StretchTable table = compute_stretch(g, lst.tree);
  json edges = json::array();
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edges()[e];
    edges.push_back({{"u", ed.u},
                     {"v", ed.v},
                     {"w", ed.w},
                     {"stretch", table.stretch[e]},
                     {"is_tree", static_cast<bool>(table.is_tree[e])}});
  }
  json out = {{"n", g.num_vertices()},
              {"m", g.num_edges()},
              {"root", lst.tree.root},
              {"tree", to_string(lst.construction)},
              {"total_stretch", table.total_stretch},
              {"edges", edges}};
  write_json(out, c.output);
  return kExitOk;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double v = 0.0;
    try {
      v = std::stod(tok);
    } catch (const std::exception&) {
      throw ValidationError("bad size '" + tok + "'");
    }
    if (!(v >= 1.0)) throw ValidationError("sizes must be >= 1");
    out.push_back(static_cast<std::size_t>(std::llround(v)));
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) throw ValidationError("sizes must be ascending");
  if (out.empty()) throw ValidationError("no sizes given");
  return out;
}

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-9));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

int run_bench(RunConfig& c) {
  if (!c.seed_given) c.seed = 1;
  const gen::Family family = gen::parse_family(c.family);
  const auto sizes = parse_sizes(c.sizes);
  std::cout << "n,m,build_ms,solve_ms,iterations,levels,relative_residual\n";
  std::vector<double> ms, solve_ms;
  bool all_converged = true;
  for (std::size_t target : sizes) {
    const WeightedGraph g = gen::by_edge_count(family, target, c.seed);
    Rng rng(derive_seed(c.seed, {target}));
    Vector b(g.num_vertices());
    for (double& v : b) v = rng.uniform() - 0.5;
    SolverOptions o = solver_options(c);
    o.oracle_check = false;
    const SolveResult r = solve_laplacian(g, b, c.eps, c.p, o);
    const SolveReport& rep = r.report;
    std::cout << g.num_vertices() << "," << g.num_edges() << "," << rep.ms_build + rep.ms_calibrate
              << "," << rep.ms_solve << "," << rep.iterations << "," << rep.levels.size() << ","
              << rep.relative_residual << "\n";
    ms.push_back(static_cast<double>(g.num_edges()));
    solve_ms.push_back(rep.ms_solve);
    all_converged = all_converged && rep.converged;
  }
  if (sizes.size() >= 2) std::cout << "# slope " << loglog_slope(ms, solve_ms) << "\n";
  return all_converged ? kExitOk : kExitNotConverged;
}

int run_verify(RunConfig& c) {
  resolve_seed(c);
  const WeightedGraph g = load_graph(c.input);
  oracle::require_oracle_size(g.num_vertices());
  require_connected(g);
  json checks = json::object();
  bool ok = true;
  auto record = [&](const std::string& name, bool pass, json detail) {
    detail["ok"] = pass;
    checks[name] = detail;
    ok = ok && pass;
  };

  const auto lev = oracle::leverage_scores(g);
  double sum = 0.0;
  for (double v : lev) sum += v;
  const double n1 = static_cast<double>(g.num_vertices() - 1);
  record("resistance_sum", std::abs(sum - n1) <= 1e-8 * std::max(1.0, n1),
         {{"sum", sum}, {"expected", n1}});

  if (g.num_edges() <= 4 * oracle::oracle_limit()) {
    const auto pi = oracle::projection_matrix(g);
    const double idem = (pi * pi - pi).norm();
    const double trace = pi.trace();
    double diag_err = 0.0;
    for (std::size_t e = 0; e < g.num_edges(); ++e)
      diag_err = std::max(diag_err, std::abs(pi(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(e)) - lev[e]));
    record("projection", idem <= 1e-8 && std::abs(trace - n1) <= 1e-8 && diag_err <= 1e-8,
           {{"idempotence_error", idem}, {"trace", trace}, {"diagonal_error", diag_err}});
  }

  const LowStretchResult lst = low_stretch_tree(g);
  const StretchTable table = compute_stretch(g, lst.tree);
  double worst = 0.0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) worst = std::max(worst, lev[e] - table.stretch[e]);
  record("stretch_dominates_leverage", worst <= 1e-9,
         {{"worst_violation", worst}, {"total_stretch", table.total_stretch}});

  if (g.num_edges() > 1 && c.kappa < static_cast<double>(g.num_edges())) {
    Rng rng(c.seed);
    SparsifyOptions so;
    so.mode = parse_sparsify_mode(c.mode);
    so.cs = c.cs;
    const SparsifyResult h = incremental_sparsify(g, c.kappa, c.xi, rng, so);
    const auto b = oracle::generalized_bounds(g, h.graph);
    record("sparsifier_sandwich", b.condition() <= 3.0 * c.kappa * (1 + 1e-9),
           {{"measured_kappa", b.condition()}, {"bound", 3.0 * c.kappa}});
  }

  Rng rng(derive_seed(c.seed, {1}));
  Vector b(g.num_vertices());
  for (double& v : b) v = rng.uniform() - 0.5;
  const SolveResult r = solve_laplacian(g, b, c.eps, c.p, solver_options(c));
  record("solve_anorm", r.report.anorm_error.value_or(1.0) <= c.eps,
         {{"anorm_error", r.report.anorm_error.value_or(-1.0)}, {"eps", c.eps}});

  json out = {{"checks", checks}, {"ok", ok}, {"config", config_json(c, "verify")}};
  write_json(out, c.report);
  return ok ? kExitOk : kExitInvalid;
}

int run_split(RunConfig& c) {
  const WeightedGraph g = load_graph(c.input);
  const ComponentSplit parts = split_components(g);
  json comps = json::array();
  for (std::size_t k = 0; k < parts.graphs.size(); ++k) {
    const std::string path = c.prefix + "." + std::to_string(k) + ".txt";
    io::store_edge_list(parts.graphs[k], path);
    comps.push_back({{"file", path},
                     {"n", parts.graphs[k].num_vertices()},
                     {"m", parts.graphs[k].num_edges()},
                     {"vertices", parts.vertices[k]}});
  }
  write_json({{"components", comps}}, c.report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver for symmetric diagonally dominant linear systems"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto seed_opt = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          cfg.seed = s;
          cfg.seed_given = true;
        },
        "random seed (default: drawn and recorded in the output)");
  };
  auto chain_opts = [&](CLI::App* cmd) {
    cmd->add_option("--p", cfg.p, "chain failure probability")->check(CLI::Range(1e-12, 1.0 - 1e-12));
    cmd->add_option("--kappa", cfg.kappa, "sparsifier kappa")->check(CLI::Range(1.0, 1e300));
    cmd->add_option("--kappa-mode", cfg.kappa_mode, "practical | theory")
        ->check(CLI::IsMember({"practical", "theory"}));
    cmd->add_option("--mode", cfg.mode, "sparsifier mode: literal | keep-tree")
        ->check(CLI::IsMember({"literal", "keep-tree"}));
    cmd->add_option("--chain-cs", cfg.chain_cs, "oversampling constant inside the chain");
    cmd->add_option("--c-r", cfg.c_r, "reduction constant c_r");
    cmd->add_option("--c-t", cfg.c_t, "iteration cap constant c_t");
    cmd->add_option("--threshold", cfg.threshold, "direct-solve edge threshold");
  };

  auto* solve_cmd = app.add_subcommand("solve", "solve A x = b");
  add_input(solve_cmd, cfg.input);
  solve_cmd->add_option("--rhs", cfg.rhs, "right-hand side file or random:<seed>");
  solve_cmd->add_option("--eps", cfg.eps, "relative A-norm accuracy")->check(CLI::Range(1e-300, 1.0));
  solve_cmd->add_option("--report", cfg.report, "JSON report path (default stdout)");
  solve_cmd->add_option("--solution", cfg.solution, "write x, one value per line");
  chain_opts(solve_cmd);
  seed_opt(solve_cmd);

  auto* sparsify_cmd = app.add_subcommand("sparsify", "incremental sparsifier of a graph");
  add_input(sparsify_cmd, cfg.input);
  sparsify_cmd->add_option("--kappa", cfg.kappa, "tree scale kappa");
  sparsify_cmd->add_option("--xi", cfg.xi, "failure probability")->check(CLI::Range(1e-300, 1.0));
  sparsify_cmd->add_option("--mode", cfg.mode, "literal | keep-tree")
      ->check(CLI::IsMember({"literal", "keep-tree"}));
  sparsify_cmd->add_option("--cs", cfg.cs, "oversampling constant C_s");
  sparsify_cmd->add_option("--output", cfg.output, "write the sparsifier as an edge list");
  sparsify_cmd->add_option("--stats", cfg.stats, "JSON stats path (default stdout)");
  sparsify_cmd->add_flag("--verify", cfg.verify, "measure kappa(G, H) with the dense oracle");
  seed_opt(sparsify_cmd);

  auto* stretch_cmd = app.add_subcommand("stretch", "low-stretch tree and per-edge stretch");
  add_input(stretch_cmd, cfg.input);
  stretch_cmd->add_option("--output", cfg.output, "JSON path (default stdout)");

  auto* bench_cmd = app.add_subcommand("bench", "timings over a generated family");
  bench_cmd->add_option("--family", cfg.family, "path | cycle | grid2d | random | complete | star");
  bench_cmd->add_option("--sizes", cfg.sizes, "ascending target edge counts, comma separated");
  bench_cmd->add_option("--eps", cfg.eps, "relative accuracy");
  chain_opts(bench_cmd);
  seed_opt(bench_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "dense-oracle checks on a small graph");
  add_input(verify_cmd, cfg.input);
  verify_cmd->add_option("--kappa", cfg.kappa, "sparsifier kappa");
  verify_cmd->add_option("--xi", cfg.xi, "sparsifier failure probability");
  verify_cmd->add_option("--cs", cfg.cs, "oversampling constant C_s");
  verify_cmd->add_option("--eps", cfg.eps, "solver accuracy");
  verify_cmd->add_option("--report", cfg.report, "JSON path (default stdout)");
  seed_opt(verify_cmd);

  auto* split_cmd = app.add_subcommand("split", "write each connected component as an edge list");
  add_input(split_cmd, cfg.input);
  split_cmd->add_option("--prefix", cfg.prefix, "output file prefix");
  split_cmd->add_option("--report", cfg.report, "JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitInvalid;
  }

  try {
    if (*solve_cmd) return run_solve(cfg);
    if (*sparsify_cmd) return run_sparsify(cfg);
    if (*stretch_cmd) return run_stretch(cfg);
    if (*bench_cmd) return run_bench(cfg);
    if (*verify_cmd) return run_verify(cfg);
    if (*split_cmd) return run_split(cfg);
  } catch (const sddkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
