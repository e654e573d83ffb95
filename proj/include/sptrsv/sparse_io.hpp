#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sptrsv {

/// Raised for any malformed Matrix Market or vector input. `line()` is the
/// 1-based line of the offending text, or 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Raised when a matrix cannot be turned into a solvable lower-triangular system.
class MatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CooEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const CooEntry&, const CooEntry&) = default;
};

/// Parsed coordinate matrix: 0-based entries, duplicates summed, sorted by (row, col).
struct CooMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<CooEntry> entries;
};

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

/// Validates the banner line; returns true for symmetric storage.
inline bool parse_banner(const std::string& line, std::size_t lineno) {
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError(lineno, "missing %%MatrixMarket banner");
  object = lowercase(object);
  format = lowercase(format);
  field = lowercase(field);
  symmetry = lowercase(symmetry);
  if (object != "matrix") throw ParseError(lineno, "unsupported object '" + object + "'");
  if (format != "coordinate") throw ParseError(lineno, "unsupported format '" + format + "' (coordinate only)");
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError(lineno, "unsupported field '" + field + "' (real or integer only)");
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError(lineno, "unsupported symmetry '" + symmetry + "'");
  return symmetry == "symmetric";
}

}  // namespace detail

/// Reads a Matrix Market coordinate file. Accepts `real` and `integer` fields with
/// `general` or `symmetric` symmetry; symmetric inputs are expanded to both triangles.
inline CooMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(0, "empty input");
  ++lineno;
  const bool symmetric = detail::parse_banner(line, lineno);

  // size line, skipping comments
  for (;;) {
    if (!std::getline(in, line)) throw ParseError(lineno, "missing size line");
    ++lineno;
    if (line.empty() || line[0] == '%' || detail::blank(line)) continue;
    break;
  }
  CooMatrix m;
  std::size_t declared = 0;
  {
    std::istringstream ss(line);
    long long r = -1, c = -1, nz = -1;
    if (!(ss >> r >> c >> nz) || r < 0 || c < 0 || nz < 0) throw ParseError(lineno, "malformed size line");
    m.rows = static_cast<std::size_t>(r);
    m.cols = static_cast<std::size_t>(c);
    declared = static_cast<std::size_t>(nz);
  }

  std::map<std::pair<std::size_t, std::size_t>, double> acc;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%' || detail::blank(line)) continue;
    std::istringstream es(line);
    long long r = 0, c = 0;
    double v = 0.0;
    if (!(es >> r >> c >> v)) throw ParseError(lineno, "malformed entry");
    if (r < 1 || c < 1 || static_cast<std::size_t>(r) > m.rows || static_cast<std::size_t>(c) > m.cols)
      throw ParseError(lineno, "index (" + std::to_string(r) + ", " + std::to_string(c) + ") out of bounds");
    if (++seen > declared) throw ParseError(lineno, "more entries than declared");
    auto i = static_cast<std::size_t>(r - 1);
    auto j = static_cast<std::size_t>(c - 1);
    acc[{i, j}] += v;
    if (symmetric && i != j) acc[{j, i}] += v;
  }
  if (seen != declared)
    throw ParseError(lineno, "expected " + std::to_string(declared) + " entries, found " + std::to_string(seen));

  m.entries.reserve(acc.size());
  for (const auto& [rc, v] : acc) m.entries.push_back({rc.first, rc.second, v});
  return m;
}

inline CooMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file '" + path + "'");
  return parse_matrix_market(in);
}

enum class DiagPolicy { require_nonzero, substitute_one };

/// Lower-triangular matrix in CSR layout. Every row ends with its nonzero
/// diagonal; column indices are strictly increasing within a row.
class LowerCsr {
 public:
  LowerCsr() = default;

  /// Takes ownership of raw CSR arrays and validates the lower-triangular invariants.
  LowerCsr(std::vector<std::size_t> row_ptr, std::vector<std::size_t> col_idx, std::vector<double> vals)
      : row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), vals_(std::move(vals)) {
    validate();
  }

  std::size_t n() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nnz() const noexcept { return vals_.size(); }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> vals() const noexcept { return vals_; }

  std::size_t row_nnz(std::size_t i) const { return row_ptr_[i + 1] - row_ptr_[i]; }
  double diag(std::size_t i) const { return vals_[row_ptr_[i + 1] - 1]; }

  /// Off-diagonal column indices of row i (its dependencies).
  std::span<const std::size_t> deps(std::size_t i) const {
    return std::span<const std::size_t>(col_idx_).subspan(row_ptr_[i], row_nnz(i) - 1);
  }
  std::span<const double> dep_vals(std::size_t i) const {
    return std::span<const double>(vals_).subspan(row_ptr_[i], row_nnz(i) - 1);
  }

  friend bool operator==(const LowerCsr&, const LowerCsr&) = default;

 private:
  void validate() const {
    if (row_ptr_.empty()) throw MatrixError("row_ptr must hold n+1 offsets");
    if (row_ptr_.front() != 0) throw MatrixError("row_ptr[0] must be 0");
    if (row_ptr_.back() != vals_.size() || col_idx_.size() != vals_.size())
      throw MatrixError("row_ptr[n] must equal nnz");
    for (std::size_t i = 0; i + 1 < row_ptr_.size(); ++i) {
      if (row_ptr_[i + 1] <= row_ptr_[i]) throw MatrixError("row " + std::to_string(i) + " has no diagonal");
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
        if (col_idx_[p] > i) throw MatrixError("row " + std::to_string(i) + " has an entry above the diagonal");
        if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1])
          throw MatrixError("row " + std::to_string(i) + " columns not strictly increasing");
      }
      std::size_t last = row_ptr_[i + 1] - 1;
      if (col_idx_[last] != i) throw MatrixError("row " + std::to_string(i) + " has no diagonal");
      if (vals_[last] == 0.0) throw MatrixError("row " + std::to_string(i) + " has a zero diagonal");
    }
  }

  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> vals_;
};

/// Keeps the entries with row >= col. Rows lacking a usable diagonal either fail
/// (require_nonzero) or get 1.0 on the diagonal (substitute_one).
inline LowerCsr extract_lower(std::span<const CooEntry> entries, std::size_t n,
                              DiagPolicy policy = DiagPolicy::require_nonzero) {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (const auto& e : entries) {
    if (e.row >= n || e.col >= n) throw MatrixError("entry outside an " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    if (e.row >= e.col) rows[e.row].emplace_back(e.col, e.value);
  }

  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> vals;
  row_ptr.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    // sum duplicates that slipped past a caller-built entry list
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& [c, v] : r) {
      if (!merged.empty() && merged.back().first == c)
        merged.back().second += v;
      else
        merged.emplace_back(c, v);
    }
    bool has_diag = !merged.empty() && merged.back().first == i && merged.back().second != 0.0;
    if (!has_diag) {
      if (policy == DiagPolicy::require_nonzero)
        throw MatrixError("row " + std::to_string(i) + " has a missing or zero diagonal");
      if (!merged.empty() && merged.back().first == i)
        merged.back().second = 1.0;
      else
        merged.emplace_back(i, 1.0);
    }
    for (const auto& [c, v] : merged) {
      col_idx.push_back(c);
      vals.push_back(v);
    }
    row_ptr.push_back(col_idx.size());
  }
  return LowerCsr(std::move(row_ptr), std::move(col_idx), std::move(vals));
}

inline LowerCsr extract_lower(const CooMatrix& m, DiagPolicy policy = DiagPolicy::require_nonzero) {
  if (m.rows != m.cols)
    throw MatrixError("matrix is " + std::to_string(m.rows) + "x" + std::to_string(m.cols) + ", expected square");
  return extract_lower(m.entries, m.rows, policy);
}

/// Row sums of L, so that the exact solution of L x = b is all ones.
inline std::vector<double> default_rhs(const LowerCsr& L) {
  std::vector<double> b(L.n(), 0.0);
  auto rp = L.row_ptr();
  auto vals = L.vals();
  for (std::size_t i = 0; i < L.n(); ++i)
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) b[i] += vals[p];
  return b;
}

/// One decimal value per line; blank lines are ignored.
inline std::vector<double> parse_vector(std::istream& in, std::size_t expected_length) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    std::istringstream ls(line);
    double v = 0.0;
    std::string rest;
    if (!(ls >> v) || (ls >> rest)) throw ParseError(lineno, "expected a single number");
    out.push_back(v);
  }
  if (out.size() != expected_length)
    throw ParseError(0, "expected " + std::to_string(expected_length) + " values, found " + std::to_string(out.size()));
  return out;
}

inline std::vector<double> read_vector(const std::string& path, std::size_t expected_length) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vector file '" + path + "'");
  return parse_vector(in, expected_length);
}

/// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline void write_vector(std::ostream& out, std::span<const double> values) {
  for (double v : values) out << format_double(v) << '\n';
}

inline void write_matrix_market(std::ostream& out, const LowerCsr& L) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << L.n() << ' ' << L.n() << ' ' << L.nnz() << '\n';
  auto rp = L.row_ptr();
  for (std::size_t i = 0; i < L.n(); ++i)
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p)
      out << i + 1 << ' ' << L.col_idx()[p] + 1 << ' ' << format_double(L.vals()[p]) << '\n';
}

}  // namespace sptrsv
