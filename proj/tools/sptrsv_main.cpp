#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

void add_common(CLI::App* sub, sptrsv::cli::RunConfig& cfg, std::string& strategy, bool with_strategy) {
  sub->add_option("--matrix", cfg.matrix, "Matrix Market file")->required();
  sub->add_option("--rhs", cfg.rhs, "right-hand side, one value per line (default: row sums)");
  sub->add_flag("--substitute-diagonal", cfg.substitute_diagonal, "use 1.0 where the diagonal is missing or zero");
  sub->add_option("--report", cfg.report, "write the JSON report here instead of stdout");
  sub->add_option("--profile-before", cfg.profile_before, "per-level CSV profile of the original schedule");
  if (!with_strategy) return;

  sub->add_option("--strategy", strategy, "none | avg | manual")->check(CLI::IsMember({"none", "avg", "manual"}));
  sub->add_option("--group-size", cfg.group_size, "levels per group for the manual strategy")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
  sub->add_option("--max-distance", cfg.guards.max_rewriting_distance, "largest allowed rewriting distance");
  sub->add_option("--alpha", cfg.guards.max_indegree_alpha, "rewrite only if the projected indegree is below this");
  sub->add_option("--beta", cfg.guards.max_index_span_beta, "largest allowed span between dependency indices");
  sub->add_option("--coeff-cap", cfg.guards.max_coeff_magnitude, "largest allowed folded constant magnitude");
  sub->add_flag("--critical-path-only", cfg.guards.critical_path_only, "rewrite only rows on a longest chain");
  sub->add_option("--profile-after", cfg.profile_after, "per-level CSV profile after the transform");
  sub->add_option("--dump", cfg.dump, "text dump of the transformed equations");
}

}  // namespace

int main(int argc, char** argv) {
  using sptrsv::cli::Command;
  CLI::App app{"Level-set analysis, equation rewriting and code emission for sparse triangular solves"};
  app.require_subcommand(1);

  sptrsv::cli::RunConfig cfg;
  std::string strategy = "none";

  auto* analyze = app.add_subcommand("analyze", "baseline level metrics and profile");
  add_common(analyze, cfg, strategy, false);

  auto* transform = app.add_subcommand("transform", "plan and apply a rewriting strategy");
  add_common(transform, cfg, strategy, true);

  auto* solve = app.add_subcommand("solve", "solve, optionally after rewriting, and verify against forward substitution");
  add_common(solve, cfg, strategy, true);
  solve->add_option("--workers", cfg.workers, "threads for the level-parallel solve")->check(CLI::PositiveNumber);
  solve->add_option("--tol", cfg.tol, "relative error tolerance");
  solve->add_option("--solution", cfg.solution, "write x here, one value per line");

  auto* codegen = app.add_subcommand("codegen", "emit a specialized straight-line solver");
  add_common(codegen, cfg, strategy, true);
  codegen->add_option("--emit", cfg.emit, "output path for the generated source")->required();
  codegen->add_option("--chunk-flops", cfg.chunk_flops, "split levels costlier than this into several functions");

  CLI11_PARSE(app, argc, argv);

  Command cmd = Command::analyze;
  if (transform->parsed()) cmd = Command::transform;
  if (solve->parsed()) cmd = Command::solve;
  if (codegen->parsed()) cmd = Command::codegen;

  try {
    cfg.strategy = sptrsv::parse_strategy(strategy);
    auto outcome = sptrsv::cli::run(cmd, cfg);
    if (!cfg.report) std::cout << outcome.report.dump(2) << '\n';
    if (outcome.exit_code != 0 && outcome.report.contains("verify")) {
      const auto& v = outcome.report["verify"];
      std::cerr << "verification failed: max_abs_error=" << v["max_abs_error"].dump()
                << " max_rel_error=" << v["max_rel_error"].dump() << " residual_inf=" << v["residual_inf"].dump()
                << " tol=" << cfg.tol << '\n';
    }
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
