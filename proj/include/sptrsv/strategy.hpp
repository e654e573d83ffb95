#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "levelset.hpp"
#include "rewrite.hpp"

namespace sptrsv {

enum class Strategy { none, avg_cost, manual };

inline std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::none: return "none";
    case Strategy::avg_cost: return "avg";
    case Strategy::manual: return "manual";
  }
  return "unknown";
}

inline Strategy parse_strategy(std::string_view name) {
  if (name == "none") return Strategy::none;
  if (name == "avg") return Strategy::avg_cost;
  if (name == "manual") return Strategy::manual;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

struct RewriteAction {
  std::size_t row = 0;
  std::size_t target = 0;

  friend bool operator==(const RewriteAction&, const RewriteAction&) = default;
};

/// Ordered row moves. Actions are listed by ascending source level, then ascending row.
struct TransformPlan {
  std::vector<RewriteAction> actions;
  double threshold_used = 0.0;
  Strategy strategy = Strategy::none;
  std::size_t group_size = 0;  ///< manual strategy only
  Guards guards;

  friend bool operator==(const TransformPlan&, const TransformPlan&) = default;
};

struct TransformReport {
  Strategy strategy = Strategy::none;
  double threshold = 0.0;
  std::size_t levels_before = 0;
  std::size_t levels_after = 0;
  double avg_cost_before = 0.0;
  double avg_cost_after = 0.0;
  Cost total_cost_before = 0;
  Cost total_cost_after = 0;
  std::size_t rows_rewritten = 0;
  std::size_t max_rewriting_distance_used = 0;
  std::vector<Cost> profile_before;
  std::vector<Cost> profile_after;
};

struct TransformResult {
  AffineSystem system;
  LevelSchedule schedule;
  TransformReport report;
};

/// Raised when applying a plan would leave a row depending on its own level or below.
class TransformError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline std::vector<std::size_t> candidate_levels(const LevelSchedule& s, double threshold) {
  std::vector<std::size_t> out;
  if (s.num_levels() == 0 || !(threshold > 0.0)) return out;
  for (std::size_t l : thin_levels(s, threshold))
    if (l >= 1) out.push_back(l);
  return out;
}

inline std::optional<CriticalPath> critical_path_if_needed(const AffineSystem& sys, const LevelSchedule& s,
                                                           const Guards& g) {
  if (!g.critical_path_only) return std::nullopt;
  return critical_path(s, sys.matrix());
}

}  // namespace detail

/// Fills thin levels up to the fixed average level cost. The first thin level past
/// level 0 is the initial target; later thin levels are drained into it row by row
/// until its projected cost reaches the threshold, then the level being drained (or,
/// if it emptied, the next thin level) becomes the new target.
inline TransformPlan compute_plan_avg(const AffineSystem& sys, const LevelSchedule& s, const Guards& guards = {}) {
  TransformPlan plan;
  plan.strategy = Strategy::avg_cost;
  plan.guards = guards;
  plan.threshold_used = avg_level_cost(s);
  const double threshold = plan.threshold_used;

  const auto thin = detail::candidate_levels(s, threshold);
  if (thin.size() < 2) return plan;
  const auto cp = detail::critical_path_if_needed(sys, s, guards);
  const CriticalPath* cpp = cp ? &*cp : nullptr;

  std::size_t target = thin[0];
  double running = static_cast<double>(s.level_costs[target]);

  for (std::size_t si = 1; si < thin.size(); ++si) {
    const std::size_t source = thin[si];
    const auto& rows = s.levels[source];
    std::vector<std::size_t> kept;  // rows that stay in the source level
    bool crossed = false;
    std::size_t idx = 0;
    for (; idx < rows.size(); ++idx) {
      const std::size_t r = rows[idx];
      if (guards.any() && !check_guards(sys, s, r, target, guards, cpp)) {
        kept.push_back(r);
        continue;
      }
      plan.actions.push_back({r, target});
      running += static_cast<double>(project_cost(sys, s, r, target).cost);
      if (running >= threshold) {
        crossed = true;
        ++idx;
        break;
      }
    }
    if (!crossed) continue;

    for (; idx < rows.size(); ++idx) kept.push_back(rows[idx]);
    if (!kept.empty()) {
      target = source;
      running = 0.0;
      for (std::size_t r : kept) running += static_cast<double>(row_cost(sys, r));
    } else if (si + 1 < thin.size()) {
      target = thin[++si];
      running = static_cast<double>(s.level_costs[target]);
    } else {
      break;
    }
  }
  return plan;
}

/// Groups consecutive thin levels (past level 0) into chunks of `group_size` and
/// rewrites every row of a chunk into the chunk's first level.
inline TransformPlan compute_plan_manual(const AffineSystem& sys, const LevelSchedule& s, std::size_t group_size,
                                         const Guards& guards = {}) {
  if (group_size < 2) throw std::invalid_argument("manual strategy needs a group size of at least 2");
  TransformPlan plan;
  plan.strategy = Strategy::manual;
  plan.group_size = group_size;
  plan.guards = guards;
  plan.threshold_used = avg_level_cost(s);

  const auto thin = detail::candidate_levels(s, plan.threshold_used);
  const auto cp = detail::critical_path_if_needed(sys, s, guards);
  const CriticalPath* cpp = cp ? &*cp : nullptr;

  std::size_t run_begin = 0;
  while (run_begin < thin.size()) {
    std::size_t run_end = run_begin + 1;
    while (run_end < thin.size() && thin[run_end] == thin[run_end - 1] + 1) ++run_end;

    for (std::size_t g = run_begin; g < run_end; g += group_size) {
      const std::size_t target = thin[g];
      const std::size_t group_end = std::min(g + group_size, run_end);
      for (std::size_t li = g + 1; li < group_end; ++li) {
        for (std::size_t r : s.levels[thin[li]]) {
          if (guards.any() && !check_guards(sys, s, r, target, guards, cpp)) continue;
          plan.actions.push_back({r, target});
        }
      }
    }
    run_begin = run_end;
  }
  return plan;
}

inline TransformPlan compute_plan(const AffineSystem& sys, const LevelSchedule& s, Strategy strategy,
                                  std::size_t group_size, const Guards& guards = {}) {
  switch (strategy) {
    case Strategy::avg_cost: return compute_plan_avg(sys, s, guards);
    case Strategy::manual: return compute_plan_manual(sys, s, group_size, guards);
    case Strategy::none: break;
  }
  TransformPlan plan;
  plan.guards = guards;
  plan.threshold_used = avg_level_cost(s);
  return plan;
}

/// Checks that a plan is well formed against the schedule it is about to be applied to.
inline void validate_plan(const LevelSchedule& s, const TransformPlan& plan) {
  std::vector<bool> seen(s.num_rows(), false);
  for (const auto& a : plan.actions) {
    if (a.row >= s.num_rows()) throw TransformError("plan row " + std::to_string(a.row) + " out of range");
    if (seen[a.row]) throw TransformError("row " + std::to_string(a.row) + " appears twice in the plan");
    seen[a.row] = true;
    if (a.target < 1 || a.target >= s.level_of[a.row])
      throw TransformError("row " + std::to_string(a.row) + " cannot move from level " +
                           std::to_string(s.level_of[a.row]) + " to level " + std::to_string(a.target));
  }
}

/// Schedule of `sys` given a row-to-level map: empty levels are dropped, indices
/// compacted, rows sorted, and costs recomputed with the mixed cost model.
inline LevelSchedule compact_schedule(const AffineSystem& sys, std::span<const std::size_t> level_of,
                                      std::size_t level_hint) {
  std::vector<std::vector<std::size_t>> buckets(level_hint);
  for (std::size_t i = 0; i < level_of.size(); ++i) {
    if (level_of[i] >= buckets.size()) buckets.resize(level_of[i] + 1);
    buckets[level_of[i]].push_back(i);
  }
  LevelSchedule out;
  out.level_of.assign(level_of.size(), 0);
  for (auto& b : buckets) {
    if (b.empty()) continue;
    const std::size_t l = out.levels.size();
    Cost c = 0;
    for (std::size_t r : b) {
      out.level_of[r] = l;
      c += row_cost(sys, r);
    }
    out.levels.push_back(std::move(b));
    out.level_costs.push_back(c);
  }
  return out;
}

/// Executes the plan in order and rebuilds the level schedule.
inline TransformResult apply_plan(const AffineSystem& sys, const LevelSchedule& s, const TransformPlan& plan) {
  validate_plan(s, plan);

  TransformResult res{sys, {}, {}};
  std::vector<std::size_t> level_of = s.level_of;
  std::size_t max_distance = 0;

  for (const auto& a : plan.actions) {
    FoldResult f = fold_row(res.system, level_of, a.row, a.target);
    for (const Term& t : f.row.terms)
      if (level_of[t.dep] >= a.target)
        throw TransformError("row " + std::to_string(a.row) + " still depends on row " + std::to_string(t.dep) +
                             " at level " + std::to_string(level_of[t.dep]));
    if (f.substitutions > 0) res.system.replace_row(a.row, std::move(f.row));
    max_distance = std::max(max_distance, level_of[a.row] - a.target);
    level_of[a.row] = a.target;
  }

  res.schedule = compact_schedule(res.system, level_of, s.num_levels());
  if (!respects_dependencies(res.schedule, [&](std::size_t i) {
        std::vector<std::size_t> d;
        for (const Term& t : res.system.row(i).terms) d.push_back(t.dep);
        return d;
      }))
    throw TransformError("transformed schedule violates a dependency");

  TransformReport& rep = res.report;
  rep.strategy = plan.strategy;
  rep.threshold = plan.threshold_used;
  rep.levels_before = s.num_levels();
  rep.levels_after = res.schedule.num_levels();
  rep.avg_cost_before = avg_level_cost(s);
  rep.avg_cost_after = avg_level_cost(res.schedule);
  rep.total_cost_before = total_cost(s);
  rep.total_cost_after = total_cost(res.schedule);
  rep.rows_rewritten = plan.actions.size();
  rep.max_rewriting_distance_used = max_distance;
  rep.profile_before = s.level_costs;
  rep.profile_after = res.schedule.level_costs;
  return res;
}

/// Re-applies a structural plan to a new right-hand side. Coefficients match the
/// original application exactly; only the constants change.
inline TransformResult replay_plan(std::shared_ptr<const LowerCsr> L, std::vector<double> new_b,
                                   const TransformPlan& plan) {
  LevelSchedule s = build_levels(*L);
  AffineSystem sys = to_affine(std::move(L), std::move(new_b));
  return apply_plan(sys, s, plan);
}

}  // namespace sptrsv
