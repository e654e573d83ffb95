#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "levelset.hpp"
#include "sparse_io.hpp"

namespace sptrsv {

enum class RowOrigin { original, rewritten };

struct Term {
  std::size_t dep = 0;
  double coef = 0.0;

  friend bool operator==(const Term&, const Term&) = default;
};

/// x[i] = beta + sum(coef * x[dep]), terms sorted by ascending dep, no zero coefficients.
struct AffineRow {
  double beta = 0.0;
  std::vector<Term> terms;
  RowOrigin origin = RowOrigin::original;

  std::size_t num_deps() const noexcept { return terms.size(); }

  friend bool operator==(const AffineRow&, const AffineRow&) = default;
};

/// Normalized equations for every row of L x = b. Untouched rows keep their link to
/// the CSR slice of L so that cost accounting and emission can use the division form.
class AffineSystem {
 public:
  AffineSystem() = default;
  AffineSystem(std::shared_ptr<const LowerCsr> matrix, std::vector<double> rhs, std::vector<AffineRow> rows)
      : matrix_(std::move(matrix)), rhs_(std::move(rhs)), rows_(std::move(rows)) {}

  std::size_t n() const noexcept { return rows_.size(); }
  const LowerCsr& matrix() const { return *matrix_; }
  const std::shared_ptr<const LowerCsr>& matrix_handle() const noexcept { return matrix_; }
  std::span<const double> rhs() const noexcept { return rhs_; }

  const AffineRow& row(std::size_t i) const { return rows_.at(i); }
  std::span<const AffineRow> rows() const noexcept { return rows_; }

  void replace_row(std::size_t i, AffineRow r) { rows_.at(i) = std::move(r); }

  friend bool operator==(const AffineSystem& a, const AffineSystem& b) {
    return a.rhs_ == b.rhs_ && a.rows_ == b.rows_ && (a.matrix_ == b.matrix_ || *a.matrix_ == *b.matrix_);
  }

 private:
  std::shared_ptr<const LowerCsr> matrix_;
  std::vector<double> rhs_;
  std::vector<AffineRow> rows_;
};

/// Original rows cost 2*nnz-1. A rewritten row with d dependencies costs 2*d: its
/// division was folded into the constants. A constant row costs nothing.
inline Cost cost_of(const AffineSystem& sys, std::size_t i, const AffineRow& r) {
  if (r.origin == RowOrigin::original) return row_cost(sys.matrix(), i);
  return 2 * static_cast<Cost>(r.num_deps());
}

inline Cost row_cost(const AffineSystem& sys, std::size_t i) { return cost_of(sys, i, sys.row(i)); }

inline AffineRow original_row(const LowerCsr& L, std::span<const double> b, std::size_t i) {
  AffineRow r;
  const double d = L.diag(i);
  r.beta = b[i] / d;
  auto deps = L.deps(i);
  auto vals = L.dep_vals(i);
  r.terms.reserve(deps.size());
  for (std::size_t p = 0; p < deps.size(); ++p) {
    double c = -vals[p] / d;
    if (c != 0.0) r.terms.push_back({deps[p], c});
  }
  return r;
}

inline AffineSystem to_affine(std::shared_ptr<const LowerCsr> L, std::vector<double> b) {
  if (b.size() != L->n())
    throw std::invalid_argument("rhs has " + std::to_string(b.size()) + " entries, matrix has " +
                                std::to_string(L->n()) + " rows");
  std::vector<AffineRow> rows;
  rows.reserve(L->n());
  for (std::size_t i = 0; i < L->n(); ++i) rows.push_back(original_row(*L, b, i));
  return AffineSystem(std::move(L), std::move(b), std::move(rows));
}

inline AffineSystem to_affine(const LowerCsr& L, std::vector<double> b) {
  return to_affine(std::make_shared<const LowerCsr>(L), std::move(b));
}

/// Per-row stability and locality limits. Unset members impose no constraint.
struct Guards {
  std::optional<std::size_t> max_rewriting_distance;
  std::optional<std::size_t> max_indegree_alpha;   ///< accept only if projected deps < alpha
  std::optional<double> max_coeff_magnitude;       ///< bound on |beta| and every |coef|
  std::optional<std::size_t> max_index_span_beta;  ///< bound on max dep - min dep
  bool critical_path_only = false;

  bool any() const noexcept {
    return max_rewriting_distance || max_indegree_alpha || max_coeff_magnitude || max_index_span_beta ||
           critical_path_only;
  }

  friend bool operator==(const Guards&, const Guards&) = default;
};

struct GuardDecision {
  bool accepted = true;
  std::string reason;

  static GuardDecision accept() { return {}; }
  static GuardDecision reject(std::string why) { return {false, std::move(why)}; }
  explicit operator bool() const noexcept { return accepted; }
};

struct FoldResult {
  AffineRow row;
  std::size_t substitutions = 0;
};

namespace detail {

/// row += c * src, dropping coefficients that land exactly on zero.
inline void axpy_terms(std::vector<Term>& row, double c, const std::vector<Term>& src) {
  std::vector<Term> out;
  out.reserve(row.size() + src.size());
  auto a = row.begin();
  auto b = src.begin();
  while (a != row.end() || b != src.end()) {
    if (b == src.end() || (a != row.end() && a->dep < b->dep)) {
      out.push_back(*a++);
    } else if (a == row.end() || b->dep < a->dep) {
      double v = c * b->coef;
      if (v != 0.0) out.push_back({b->dep, v});
      ++b;
    } else {
      double v = a->coef + c * b->coef;
      if (v != 0.0) out.push_back({a->dep, v});
      ++a;
      ++b;
    }
  }
  row = std::move(out);
}

}  // namespace detail

/// Substitutes the current equation of every dependency sitting at level >= target
/// into row i until none remain. Picks the deepest dependency first, lowest index on ties.
inline FoldResult fold_row(const AffineSystem& sys, std::span<const std::size_t> level_of, std::size_t i,
                           std::size_t target) {
  FoldResult res{sys.row(i), 0};
  AffineRow& r = res.row;
  for (;;) {
    auto pick = r.terms.end();
    for (auto it = r.terms.begin(); it != r.terms.end(); ++it) {
      std::size_t lvl = level_of[it->dep];
      if (lvl < target) continue;
      if (pick == r.terms.end() || lvl > level_of[pick->dep]) pick = it;
    }
    if (pick == r.terms.end()) break;

    const std::size_t k = pick->dep;
    const double c = pick->coef;
    r.terms.erase(pick);
    const AffineRow& src = sys.row(k);
    r.beta += c * src.beta;
    detail::axpy_terms(r.terms, c, src.terms);
    ++res.substitutions;
  }
  if (res.substitutions > 0) r.origin = RowOrigin::rewritten;
  return res;
}

struct ProjectedCost {
  std::size_t deps = 0;
  Cost cost = 0;

  friend bool operator==(const ProjectedCost&, const ProjectedCost&) = default;
};

/// Dependency count and cost row i would have after being rewritten to `target`.
inline ProjectedCost project_cost(const AffineSystem& sys, const LevelSchedule& s, std::size_t i, std::size_t target) {
  if (target > s.level_of.at(i)) throw std::invalid_argument("projection target below the row's level");
  if (target == s.level_of[i]) return {sys.row(i).num_deps(), row_cost(sys, i)};
  FoldResult f = fold_row(sys, s.level_of, i, target);
  return {f.row.num_deps(), cost_of(sys, i, f.row)};
}

/// Evaluates the guards for moving row i to `target`. `cp` may be supplied to avoid
/// recomputing the critical path of the original matrix on every call.
inline GuardDecision check_guards(const AffineSystem& sys, const LevelSchedule& s, std::size_t i, std::size_t target,
                                  const Guards& g, const CriticalPath* cp = nullptr) {
  const std::size_t level = s.level_of.at(i);
  if (target >= level) throw std::invalid_argument("guard target must be above the row's level");

  if (g.max_rewriting_distance && level - target > *g.max_rewriting_distance)
    return GuardDecision::reject("distance " + std::to_string(level - target) + " > " +
                                 std::to_string(*g.max_rewriting_distance));

  if (g.critical_path_only) {
    CriticalPath local;
    if (!cp) {
      local = critical_path(build_levels(sys.matrix()), sys.matrix());
      cp = &local;
    }
    if (!cp->on_path.at(i)) return GuardDecision::reject("row not on critical path");
  }

  if (!g.max_indegree_alpha && !g.max_coeff_magnitude && !g.max_index_span_beta) return GuardDecision::accept();

  FoldResult f = fold_row(sys, s.level_of, i, target);
  const AffineRow& r = f.row;
  if (g.max_indegree_alpha && r.num_deps() >= *g.max_indegree_alpha)
    return GuardDecision::reject("indegree " + std::to_string(r.num_deps()) + " >= " +
                                 std::to_string(*g.max_indegree_alpha));
  if (g.max_coeff_magnitude) {
    const double cap = *g.max_coeff_magnitude;
    bool over = !(std::abs(r.beta) <= cap);
    for (const Term& t : r.terms) over = over || !(std::abs(t.coef) <= cap);
    if (over) return GuardDecision::reject("coefficient magnitude exceeds " + format_double(cap));
  }
  if (g.max_index_span_beta && r.num_deps() > 1) {
    std::size_t span = r.terms.back().dep - r.terms.front().dep;
    if (span > *g.max_index_span_beta)
      return GuardDecision::reject("index span " + std::to_string(span) + " > " +
                                   std::to_string(*g.max_index_span_beta));
  }
  return GuardDecision::accept();
}

struct RewriteOutcome {
  GuardDecision decision;
  std::size_t substitutions = 0;
};

/// Rewrites row i in place so that every remaining dependency sits above `target`.
/// The row is left untouched when a guard rejects the move.
inline RewriteOutcome rewrite_row(AffineSystem& sys, const LevelSchedule& s, std::size_t i, std::size_t target,
                                  const Guards& g = {}, const CriticalPath* cp = nullptr) {
  if (target >= s.level_of.at(i)) throw std::invalid_argument("rewrite target must be above the row's level");
  if (g.any()) {
    GuardDecision d = check_guards(sys, s, i, target, g, cp);
    if (!d) return {std::move(d), 0};
  }
  FoldResult f = fold_row(sys, s.level_of, i, target);
  if (f.substitutions > 0) sys.replace_row(i, std::move(f.row));
  return {GuardDecision::accept(), f.substitutions};
}

}  // namespace sptrsv
