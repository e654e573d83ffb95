#pragma once

#include <algorithm>
#include <barrier>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "levelset.hpp"
#include "rewrite.hpp"
#include "sparse_io.hpp"

namespace sptrsv {

namespace detail {

// Sum of vals[p] * x[cols[p]] in ascending p, seeded with the first product.
inline double dot_ascending(std::span<const std::size_t> cols, std::span<const double> vals,
                            std::span<const double> x) {
  double sum = vals[0] * x[cols[0]];
  for (std::size_t p = 1; p < cols.size(); ++p) sum += vals[p] * x[cols[p]];
  return sum;
}

// max that sticks at NaN once any operand is NaN
inline double max_nan(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
  return std::max(a, b);
}

}  // namespace detail

/// Serial forward substitution over the CSR rows of L.
inline std::vector<double> solve_reference(const LowerCsr& L, std::span<const double> b) {
  if (b.size() != L.n()) throw std::invalid_argument("rhs length does not match the matrix");
  std::vector<double> x(L.n(), 0.0);
  for (std::size_t i = 0; i < L.n(); ++i) {
    auto deps = L.deps(i);
    x[i] = deps.empty() ? b[i] / L.diag(i) : (b[i] - detail::dot_ascending(deps, L.dep_vals(i), x)) / L.diag(i);
  }
  return x;
}

/// Value of row i given the already-computed entries of x. Untouched rows use the
/// division form of L, rewritten rows their folded affine form.
inline double evaluate_row(const AffineSystem& sys, std::size_t i, std::span<const double> x) {
  const AffineRow& r = sys.row(i);
  if (r.origin == RowOrigin::original) {
    const LowerCsr& L = sys.matrix();
    auto deps = L.deps(i);
    const double bi = sys.rhs()[i];
    return deps.empty() ? bi / L.diag(i) : (bi - detail::dot_ascending(deps, L.dep_vals(i), x)) / L.diag(i);
  }
  double acc = r.beta;
  for (const Term& t : r.terms) acc += t.coef * x[t.dep];
  return acc;
}

struct SolveResult {
  std::vector<double> x;
  std::size_t barriers = 0;
};

/// Raised when a schedule does not describe the system handed to the executor.
class ScheduleMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void check_schedule(const AffineSystem& sys, const LevelSchedule& s) {
  if (s.num_rows() != sys.n())
    throw ScheduleMismatch("schedule covers " + std::to_string(s.num_rows()) + " rows, system has " +
                           std::to_string(sys.n()));
  const bool ok = respects_dependencies(s, [&](std::size_t i) {
    const AffineRow& r = sys.row(i);
    std::vector<std::size_t> d;
    if (r.origin == RowOrigin::original) {
      auto deps = sys.matrix().deps(i);
      d.assign(deps.begin(), deps.end());
    } else {
      for (const Term& t : r.terms) d.push_back(t.dep);
    }
    return d;
  });
  if (!ok) throw ScheduleMismatch("schedule does not respect the system's dependencies");
}

/// Level-by-level execution with a full barrier between consecutive levels. Each row
/// is computed by exactly one worker with a fixed operation order, so x is bitwise
/// identical for any worker count.
inline SolveResult solve_levels(const AffineSystem& sys, const LevelSchedule& s, std::size_t workers = 1) {
  check_schedule(sys, s);
  SolveResult res;
  res.x.assign(sys.n(), 0.0);
  res.barriers = s.num_levels() > 0 ? s.num_levels() - 1 : 0;
  workers = std::max<std::size_t>(workers, 1);

  if (workers == 1) {
    for (const auto& level : s.levels)
      for (std::size_t r : level) res.x[r] = evaluate_row(sys, r, res.x);
    return res;
  }

  std::barrier sync(static_cast<std::ptrdiff_t>(workers));
  auto work = [&](std::size_t w) {
    for (const auto& level : s.levels) {
      const std::size_t chunk = (level.size() + workers - 1) / workers;
      const std::size_t begin = std::min(level.size(), w * chunk);
      const std::size_t end = std::min(level.size(), begin + chunk);
      for (std::size_t p = begin; p < end; ++p) res.x[level[p]] = evaluate_row(sys, level[p], res.x);
      sync.arrive_and_wait();
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work, w);
    work(0);
  }
  return res;
}

/// ||L x - b||_inf
inline double residual_inf(const LowerCsr& L, std::span<const double> x, std::span<const double> b) {
  double worst = 0.0;
  auto rp = L.row_ptr();
  for (std::size_t i = 0; i < L.n(); ++i) {
    double s = 0.0;
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) s += L.vals()[p] * x[L.col_idx()[p]];
    worst = detail::max_nan(worst, std::abs(s - b[i]));
  }
  return worst;
}

/// ||x - ref||_inf / ||ref||_inf, or the absolute difference when ref is zero.
inline double relative_inf_error(std::span<const double> x, std::span<const double> ref) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff = detail::max_nan(diff, std::abs(x[i] - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

struct VerifyReport {
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  double residual_inf = 0.0;
  bool pass = true;
};

/// Componentwise comparison against a reference. Components whose reference is zero
/// are scaled by ||ref||_inf instead. Any NaN fails.
inline VerifyReport verify(std::span<const double> x, std::span<const double> x_ref, const LowerCsr& L,
                           std::span<const double> b, double tol = 1e-8) {
  if (x.size() != x_ref.size()) throw std::invalid_argument("solution and reference lengths differ");
  VerifyReport rep;
  double ref_norm = 0.0;
  for (double v : x_ref) ref_norm = std::max(ref_norm, std::abs(v));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double abs_err = std::abs(x[i] - x_ref[i]);
    const double scale = x_ref[i] != 0.0 ? std::abs(x_ref[i]) : ref_norm;
    const double rel_err = scale > 0.0 ? abs_err / scale : abs_err;
    rep.max_abs_error = detail::max_nan(rep.max_abs_error, abs_err);
    rep.max_rel_error = detail::max_nan(rep.max_rel_error, rel_err);
  }
  rep.residual_inf = residual_inf(L, x, b);
  rep.pass = rep.max_rel_error <= tol;
  return rep;
}

}  // namespace sptrsv
