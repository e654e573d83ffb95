#pragma once

// Shared fixtures and independent oracles. Nothing here calls into the library's
// algorithms; the oracles work on dense matrices and plain recursion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "sptrsv/sparse_io.hpp"

namespace fixtures {

using Dense = std::vector<std::vector<double>>;

/// n=6: a fat level, a thin chain and a branch. Exact solution is all ones.
inline std::vector<sptrsv::CooEntry> chain6_entries() {
  return {{0, 0, 2.0},  {1, 0, -1.0}, {1, 1, 2.0}, {2, 1, -1.0}, {2, 2, 2.0}, {3, 2, -1.0},
          {3, 3, 2.0},  {4, 0, -1.0}, {4, 4, 2.0}, {5, 3, -1.0}, {5, 5, 2.0}};
}

inline sptrsv::LowerCsr chain6() { return sptrsv::extract_lower(chain6_entries(), 6); }

inline Dense to_dense(const sptrsv::LowerCsr& L) {
  Dense d(L.n(), std::vector<double>(L.n(), 0.0));
  for (std::size_t i = 0; i < L.n(); ++i)
    for (std::size_t p = L.row_ptr()[i]; p < L.row_ptr()[i + 1]; ++p) d[i][L.col_idx()[p]] = L.vals()[p];
  return d;
}

/// Textbook dense forward substitution.
inline std::vector<double> dense_forward(const Dense& A, const std::vector<double>& b) {
  const std::size_t n = A.size();
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    long double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= static_cast<long double>(A[i][k]) * x[k];
    x[i] = static_cast<double>(s / A[i][i]);
  }
  return x;
}

/// Level of each row as the longest dependency chain ending there, by memoized recursion.
inline std::vector<std::size_t> brute_force_levels(const Dense& A) {
  const std::size_t n = A.size();
  std::vector<long> memo(n, -1);
  std::function<std::size_t(std::size_t)> depth = [&](std::size_t i) -> std::size_t {
    if (memo[i] >= 0) return static_cast<std::size_t>(memo[i]);
    std::size_t best = 0;
    for (std::size_t k = 0; k < i; ++k)
      if (A[i][k] != 0.0) best = std::max(best, depth(k) + 1);
    memo[i] = static_cast<long>(best);
    return best;
  };
  std::vector<std::size_t> lv(n);
  for (std::size_t i = 0; i < n; ++i) lv[i] = depth(i);
  return lv;
}

/// Rows on some longest chain, found by enumerating every source-to-sink chain.
/// Exponential; keep n small.
inline std::set<std::size_t> brute_force_critical_rows(const Dense& A, std::size_t* longest = nullptr) {
  const std::size_t n = A.size();
  std::vector<std::vector<std::size_t>> chains;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> walk = [&](std::size_t i) {
    cur.push_back(i);
    bool extended = false;
    for (std::size_t j = i + 1; j < n; ++j)
      if (A[j][i] != 0.0) {
        extended = true;
        walk(j);
      }
    if (!extended) chains.push_back(cur);
    cur.pop_back();
  };
  for (std::size_t i = 0; i < n; ++i) {
    bool root = true;
    for (std::size_t k = 0; k < i; ++k) root = root && A[i][k] == 0.0;
    if (root) walk(i);
  }
  std::size_t len = 0;
  for (const auto& c : chains) len = std::max(len, c.size());
  std::set<std::size_t> rows;
  for (const auto& c : chains)
    if (c.size() == len) rows.insert(c.begin(), c.end());
  if (longest) *longest = len;
  return rows;
}

/// Dense affine form of row i after substituting ORIGINAL equations of every
/// dependency whose original level is >= target. Returns coefficients of length n
/// with the constant in slot n.
inline std::vector<double> expand_with_originals(const Dense& A, const std::vector<double>& b,
                                                 const std::vector<std::size_t>& level, std::size_t i,
                                                 std::size_t target) {
  const std::size_t n = A.size();
  auto original = [&](std::size_t r) {
    std::vector<double> e(n + 1, 0.0);
    e[n] = b[r] / A[r][r];
    for (std::size_t k = 0; k < r; ++k)
      if (A[r][k] != 0.0) e[k] = -A[r][k] / A[r][r];
    return e;
  };
  std::vector<double> e = original(i);
  for (;;) {
    std::size_t pick = n;
    for (std::size_t k = 0; k < n; ++k)
      if (e[k] != 0.0 && level[k] >= target && (pick == n || level[k] > level[pick])) pick = k;
    if (pick == n) break;
    const double c = e[pick];
    e[pick] = 0.0;
    auto sub = original(pick);
    for (std::size_t m = 0; m <= n; ++m) e[m] += c * sub[m];
  }
  return e;
}

struct RandomSystem {
  sptrsv::LowerCsr L;
  std::vector<double> b;
};

/// Strictly diagonally dominant lower-triangular matrix with the requested density
/// of off-diagonal entries, and a random right-hand side.
inline RandomSystem random_dominant(std::mt19937_64& rng, std::size_t n, double density) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<sptrsv::CooEntry> e;
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t k = 0; k < i; ++k) {
      if (unit(rng) < density) {
        double v = val(rng);
        if (v == 0.0) v = 0.5;
        e.push_back({i, k, v});
        off += std::abs(v);
      }
    }
    double d = (off + 0.5 + unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    e.push_back({i, i, d});
  }
  RandomSystem s{sptrsv::extract_lower(e, n), {}};
  s.b.resize(n);
  for (auto& v : s.b) v = val(rng) * 10.0;
  return s;
}

/// Lower-bidiagonal chain with a few branches: long thin stretches like the corpus
/// matrices that motivate rewriting. Diagonal entries d, sub-diagonal entries -c.
inline sptrsv::LowerCsr thin_chain(std::size_t n, double d, double c, std::size_t branch_every = 0) {
  std::vector<sptrsv::CooEntry> e;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) e.push_back({i, i - 1, -c});
    if (branch_every && i >= 2 && i % branch_every == 0) e.push_back({i, i - 2, -c / 2});
    e.push_back({i, i, d});
  }
  return sptrsv::extract_lower(e, n);
}

/// Row 0, then `fan` rows hanging off it (one fat level), then a chain of `chain`
/// rows x[i] = b[i] + ratio * x[i-1]. With the row-sum rhs the solution is all ones;
/// folding the chain far multiplies coefficients by ratio per step.
inline sptrsv::LowerCsr fan_then_chain(std::size_t fan, std::size_t chain, double ratio) {
  std::vector<sptrsv::CooEntry> e{{0, 0, 1.0}};
  for (std::size_t r = 1; r <= fan; ++r) e.insert(e.end(), {{r, 0, -1.0}, {r, r, 1.0}});
  for (std::size_t r = fan + 1; r <= fan + chain; ++r) e.insert(e.end(), {{r, r - 1, -ratio}, {r, r, 1.0}});
  const std::size_t n = fan + chain + 1;
  return sptrsv::extract_lower(e, n);
}

}  // namespace fixtures
