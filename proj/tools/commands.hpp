#pragma once

// Subcommand implementations shared by the command-line front end and its tests.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sptrsv/codegen.hpp"
#include "sptrsv/report_json.hpp"
#include "sptrsv/sptrsv.hpp"

namespace sptrsv::cli {

enum class Command { analyze, transform, solve, codegen };

struct RunConfig {
  std::string matrix;
  std::optional<std::string> rhs;
  Strategy strategy = Strategy::none;
  std::size_t group_size = 10;
  Guards guards;
  std::size_t workers = 1;
  double tol = 1e-8;
  std::optional<Cost> chunk_flops;
  bool substitute_diagonal = false;

  std::optional<std::string> report;
  std::optional<std::string> profile_before;
  std::optional<std::string> profile_after;
  std::optional<std::string> solution;
  std::optional<std::string> emit;
  std::optional<std::string> dump;
};

struct RunOutcome {
  nlohmann::ordered_json report;
  int exit_code = 0;
};

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

struct Loaded {
  std::shared_ptr<const LowerCsr> L;
  std::vector<double> b;
  LevelSchedule schedule;
  AffineSystem system;
};

inline Loaded load(const RunConfig& cfg) {
  Loaded d;
  CooMatrix coo = read_matrix_market(cfg.matrix);
  d.L = std::make_shared<const LowerCsr>(
      extract_lower(coo, cfg.substitute_diagonal ? DiagPolicy::substitute_one : DiagPolicy::require_nonzero));
  d.b = cfg.rhs ? read_vector(*cfg.rhs, d.L->n()) : default_rhs(*d.L);
  d.schedule = build_levels(*d.L);
  d.system = to_affine(d.L, d.b);
  return d;
}

inline void write_profile(const std::optional<std::string>& path, const LevelSchedule& s) {
  if (!path) return;
  auto out = open_output(*path);
  write_profile_csv(out, s);
}

inline void dump_system(const std::string& path, const AffineSystem& sys, const LevelSchedule& s) {
  auto out = open_output(path);
  out << "# row level origin beta [dep:coef ...]\n";
  for (std::size_t i = 0; i < sys.n(); ++i) {
    const AffineRow& r = sys.row(i);
    out << i << ' ' << s.level_of[i] << ' ' << (r.origin == RowOrigin::original ? "original" : "rewritten") << ' '
        << format_double(r.beta);
    for (const Term& t : r.terms) out << ' ' << t.dep << ':' << format_double(t.coef);
    out << '\n';
  }
}

inline nlohmann::ordered_json base_report(const RunConfig& cfg, const Loaded& d, const TransformResult& t) {
  nlohmann::ordered_json j;
  j["matrix"] = cfg.matrix;
  j["n"] = d.L->n();
  j["nnz_lower"] = d.L->nnz();
  j["strategy"] = std::string(strategy_name(cfg.strategy));
  j["threshold"] = t.report.threshold;
  j["num_levels_before"] = t.report.levels_before;
  j["num_levels_after"] = t.report.levels_after;
  j["avg_level_cost_before"] = t.report.avg_cost_before;
  j["avg_level_cost_after"] = t.report.avg_cost_after;
  j["total_level_cost_before"] = t.report.total_cost_before;
  j["total_level_cost_after"] = t.report.total_cost_after;
  j["rows_rewritten"] = t.report.rows_rewritten;
  j["barriers"] = t.schedule.num_levels() > 0 ? t.schedule.num_levels() - 1 : 0;
  j["max_rewriting_distance_used"] = t.report.max_rewriting_distance_used;
  return j;
}

inline TransformResult transform(const RunConfig& cfg, const Loaded& d) {
  TransformPlan plan = compute_plan(d.system, d.schedule, cfg.strategy, cfg.group_size, cfg.guards);
  return apply_plan(d.system, d.schedule, plan);
}

}  // namespace detail

inline void validate(const RunConfig& cfg) {
  if (cfg.matrix.empty()) throw std::invalid_argument("--matrix is required");
  if (cfg.strategy == Strategy::manual && cfg.group_size < 2)
    throw std::invalid_argument("--group-size must be at least 2 for the manual strategy");
  if (!(cfg.tol >= 0.0)) throw std::invalid_argument("--tol must be non-negative");
}

/// Runs one subcommand, writing every requested output file. The returned report is
/// what the front end prints or stores under --report.
inline RunOutcome run(Command cmd, const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  if (cmd == Command::analyze) cfg.strategy = Strategy::none;
  validate(cfg);
  if (cmd == Command::transform && cfg.strategy == Strategy::none)
    throw std::invalid_argument("transform needs --strategy avg or manual");
  if (cmd == Command::codegen && !cfg.emit) throw std::invalid_argument("codegen needs --emit PATH");

  detail::Loaded d = detail::load(cfg);
  TransformResult t = detail::transform(cfg, d);

  RunOutcome out;
  out.report = detail::base_report(cfg, d, t);
  detail::write_profile(cfg.profile_before, d.schedule);
  if (cmd != Command::analyze) detail::write_profile(cfg.profile_after, t.schedule);
  if (cfg.dump) detail::dump_system(*cfg.dump, t.system, t.schedule);

  if (cmd == Command::solve) {
    std::vector<double> x_ref = solve_reference(*d.L, d.b);
    SolveResult sr = solve_levels(t.system, t.schedule, cfg.workers);
    VerifyReport v = verify(sr.x, x_ref, *d.L, d.b, cfg.tol);
    out.report["barriers"] = sr.barriers;
    out.report["verify"] = to_json(v);
    if (cfg.solution) {
      auto f = detail::open_output(*cfg.solution);
      write_vector(f, sr.x);
    }
    if (!v.pass) out.exit_code = 1;
  }

  if (cmd == Command::codegen) {
    EmittedKernel k = emit(t.system, t.schedule, cfg.chunk_flops);
    auto f = detail::open_output(*cfg.emit);
    f << k.source_text;
    if (!f) throw std::runtime_error("failed writing '" + *cfg.emit + "'");
    out.report["code_size_bytes"] = code_size(k);
  }

  if (cfg.report) {
    auto f = detail::open_output(*cfg.report);
    f << out.report.dump(2) << '\n';
  }
  return out;
}

}  // namespace sptrsv::cli
