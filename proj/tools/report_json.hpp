#pragma once

// JSON serialization of solver and sparsifier results for the CLI.

#include <nlohmann/json.hpp>

#include "sddkit/chain.hpp"
#include "sddkit/solver.hpp"
#include "sddkit/sparsify.hpp"

namespace sddkit::cli {

using nlohmann::json;

inline json level_stats_json(const LevelStats& s) {
  return {{"n", s.n},
          {"m", s.m},
          {"b_edges", s.b_edges},
          {"next_n", s.next_n},
          {"next_m", s.next_m},
          {"xi", s.xi},
          {"q", s.q},
          {"t", s.t},
          {"t_prime", s.t_prime},
          {"tree_stretch", s.tree_stretch},
          {"tree", to_string(s.construction)},
          {"off_tree_picks", s.off_tree_picks},
          {"retries", s.retries},
          {"escalations", s.escalations},
          {"seed", s.seed},
          {"ratio", std::isfinite(s.ratio) ? json(s.ratio) : json(nullptr)}};
}

inline json level_report_json(const LevelReport& l) {
  json j = level_stats_json(l.stats);
  j["kappa"] = l.kappa;
  j["measured_kappa"] = l.measured_kappa;
  j["lambda_min"] = l.lambda_min;
  j["lambda_max"] = l.lambda_max;
  j["inner_iterations"] = l.inner_iterations;
  j["calls"] = l.calls;
  j["iterations"] = l.iterations;
  return j;
}

inline json solve_report_json(const SolveReport& r) {
  json levels = json::array();
  for (const LevelReport& l : r.levels) levels.push_back(level_report_json(l));
  json j = {{"n", r.n},
            {"reduced_n", r.reduced_n},
            {"m", r.m},
            {"reduction", r.reduction},
            {"eps", r.eps},
            {"p", r.p},
            {"residual_target", r.residual_target},
            {"iteration_cap", r.iteration_cap},
            {"levels", levels},
            {"terminal", {{"n", r.terminal_n}, {"m", r.terminal_m}, {"solves", r.terminal_solves}}},
            {"iterations", r.iterations},
            {"residuals", r.residuals},
            {"relative_residual", r.relative_residual},
            {"converged", r.converged},
            {"wallclock_ms",
             {{"reduce", r.ms_reduce},
              {"build", r.ms_build},
              {"calibrate", r.ms_calibrate},
              {"solve", r.ms_solve},
              {"oracle", r.ms_oracle}}},
            {"warnings", r.warnings},
            {"seed", r.seed}};
  if (r.anorm_error) j["anorm_error"] = *r.anorm_error;
  return j;
}

inline json sparsify_stats_json(const SparsifyResult& s, const WeightedGraph& g) {
  return {{"mode", to_string(s.mode)},
          {"n", g.num_vertices()},
          {"m", g.num_edges()},
          {"q", s.spec.q},
          {"t", s.spec.t},
          {"t_prime", s.off_tree_weight},
          {"xi", s.spec.xi},
          {"cs", s.spec.cs},
          {"tree", to_string(s.construction)},
          {"tree_stretch", s.tree_stretch},
          {"off_tree_picks", s.off_tree_picks},
          {"expected_off_tree_picks", s.expected_off_tree_picks()},
          {"edges", s.graph.num_edges()},
          {"tree_edges", s.tree_edges},
          {"off_tree_edges", s.off_tree_edges}};
}

}  // namespace sddkit::cli
