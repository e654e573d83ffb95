#pragma once

#include <string>

#include "json.hpp"
#include "solver.hpp"
#include "strategy.hpp"

namespace sptrsv {

/// Flat document named after the metrics of a strategy comparison: the metrics
/// describe the transformed system.
inline nlohmann::ordered_json to_json(const TransformReport& r) {
  nlohmann::ordered_json j;
  j["strategy"] = std::string(strategy_name(r.strategy));
  j["threshold"] = r.threshold;
  j["num_levels"] = r.levels_after;
  j["avg_level_cost"] = r.avg_cost_after;
  j["total_level_cost"] = r.total_cost_after;
  j["rows_rewritten"] = r.rows_rewritten;
  j["max_distance_used"] = r.max_rewriting_distance_used;
  return j;
}

inline nlohmann::ordered_json to_json(const VerifyReport& v) {
  nlohmann::ordered_json j;
  j["max_abs_error"] = v.max_abs_error;
  j["max_rel_error"] = v.max_rel_error;
  j["residual_inf"] = v.residual_inf;
  j["pass"] = v.pass;
  return j;
}

inline nlohmann::ordered_json to_json(const TransformPlan& p) {
  nlohmann::ordered_json j;
  j["strategy"] = std::string(strategy_name(p.strategy));
  j["threshold"] = p.threshold_used;
  if (p.strategy == Strategy::manual) j["group_size"] = p.group_size;
  auto& acts = j["actions"] = nlohmann::ordered_json::array();
  for (const auto& a : p.actions) acts.push_back({a.row, a.target});
  return j;
}

}  // namespace sptrsv
