#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse_io.hpp"

namespace sptrsv {

using Cost = std::int64_t;

/// Partition of rows into dependency levels. Levels are 0-indexed, rows inside a
/// level are kept in ascending order, and `level_costs[l]` is the FLOP cost of level l
/// under whatever cost model produced the schedule.
struct LevelSchedule {
  std::vector<std::size_t> level_of;
  std::vector<std::vector<std::size_t>> levels;
  std::vector<Cost> level_costs;

  std::size_t num_levels() const noexcept { return levels.size(); }
  std::size_t num_rows() const noexcept { return level_of.size(); }

  friend bool operator==(const LevelSchedule&, const LevelSchedule&) = default;
};

/// FLOPs of an untouched row: one multiply and one subtract per dependency plus the division.
inline Cost row_cost(const LowerCsr& L, std::size_t i) { return 2 * static_cast<Cost>(L.row_nnz(i)) - 1; }

/// Level-set construction: a row sits one level below its deepest dependency.
inline LevelSchedule build_levels(const LowerCsr& L) {
  const std::size_t n = L.n();
  LevelSchedule s;
  s.level_of.assign(n, 0);
  std::size_t depth = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lvl = 0;
    for (std::size_t k : L.deps(i)) lvl = std::max(lvl, s.level_of[k] + 1);
    s.level_of[i] = lvl;
    depth = std::max(depth, lvl + 1);
  }
  if (n == 0) depth = 0;
  s.levels.resize(depth);
  s.level_costs.assign(depth, 0);
  for (std::size_t i = 0; i < n; ++i) {
    s.levels[s.level_of[i]].push_back(i);
    s.level_costs[s.level_of[i]] += row_cost(L, i);
  }
  return s;
}

/// Recomputes the cost of level l directly from L (original cost model).
inline Cost level_cost(const LevelSchedule& s, const LowerCsr& L, std::size_t l) {
  Cost c = 0;
  for (std::size_t r : s.levels.at(l)) c += row_cost(L, r);
  return c;
}

inline Cost total_cost(const LevelSchedule& s) {
  return std::accumulate(s.level_costs.begin(), s.level_costs.end(), Cost{0});
}

inline double avg_level_cost(const LevelSchedule& s) {
  if (s.levels.empty()) return 0.0;
  return static_cast<double>(total_cost(s)) / static_cast<double>(s.num_levels());
}

/// Levels whose cost is strictly below `threshold`, ascending.
inline std::vector<std::size_t> thin_levels(const LevelSchedule& s, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("thin-level threshold must be positive");
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < s.num_levels(); ++l)
    if (static_cast<double>(s.level_costs[l]) < threshold) out.push_back(l);
  return out;
}

struct CriticalPath {
  std::vector<bool> on_path;  ///< per row
  std::size_t length = 0;     ///< node count of the longest chain
};

/// Rows lying on at least one longest dependency chain of L.
inline CriticalPath critical_path(const LevelSchedule& s, const LowerCsr& L) {
  const std::size_t n = L.n();
  CriticalPath cp;
  cp.on_path.assign(n, false);
  if (n == 0) return cp;

  // height[i]: node count of the longest chain starting at i and following dependents
  std::vector<std::size_t> height(n, 1);
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t k : L.deps(i)) height[k] = std::max(height[k], height[i] + 1);

  for (std::size_t i = 0; i < n; ++i) cp.length = std::max(cp.length, s.level_of[i] + height[i]);
  for (std::size_t i = 0; i < n; ++i) cp.on_path[i] = s.level_of[i] + height[i] == cp.length;
  return cp;
}

/// True when every dependency of every row sits at a strictly lower level and each
/// row is listed exactly once. `deps(i)` must return an iterable of row indices.
template <typename DepsFn>
bool respects_dependencies(const LevelSchedule& s, DepsFn&& deps) {
  const std::size_t n = s.num_rows();
  std::vector<int> seen(n, 0);
  for (std::size_t l = 0; l < s.num_levels(); ++l) {
    if (s.levels[l].empty()) return false;
    for (std::size_t r : s.levels[l]) {
      if (r >= n || s.level_of[r] != l || seen[r]++) return false;
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k : deps(i))
      if (s.level_of[k] >= s.level_of[i]) return false;
  return true;
}

/// CSV profile: header "level,rows,cost", one line per level.
inline void write_profile_csv(std::ostream& out, const LevelSchedule& s) {
  out << "level,rows,cost\n";
  for (std::size_t l = 0; l < s.num_levels(); ++l)
    out << l << ',' << s.levels[l].size() << ',' << s.level_costs[l] << '\n';
}

}  // namespace sptrsv
