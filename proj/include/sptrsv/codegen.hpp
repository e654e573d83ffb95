#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "levelset.hpp"
#include "rewrite.hpp"

namespace sptrsv {

struct KernelFunction {
  std::string name;
  std::size_t level = 0;
  std::size_t first = 0;  ///< position of the first row within the level
  std::size_t last = 0;   ///< one past the last position
};

struct EmittedKernel {
  std::string source_text;
  std::vector<KernelFunction> functions;

  std::size_t size_bytes() const noexcept { return source_text.size(); }
};

/// Decimal double literal with 17 significant digits. Integral values keep a
/// trailing ".0" so the text never degrades into integer arithmetic when compiled.
inline std::string double_literal(double v) {
  if (std::isnan(v)) return "NAN";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline void emit_statement(std::string& out, const AffineSystem& sys, std::size_t i) {
  const AffineRow& r = sys.row(i);
  out += "  x[" + std::to_string(i) + "] = ";
  if (r.origin == RowOrigin::original) {
    const LowerCsr& L = sys.matrix();
    const std::string b = double_literal(sys.rhs()[i]);
    const std::string d = double_literal(L.diag(i));
    auto deps = L.deps(i);
    auto vals = L.dep_vals(i);
    if (deps.empty()) {
      out += b + " / " + d;
    } else {
      std::string sum;
      for (std::size_t p = 0; p < deps.size(); ++p) {
        if (p) sum += " + ";
        sum += "(" + double_literal(vals[p]) + ") * x[" + std::to_string(deps[p]) + "]";
      }
      if (deps.size() > 1) sum = "(" + sum + ")";
      out += "(" + b + " - " + sum + ") / " + d;
    }
  } else {
    out += double_literal(r.beta);
    for (const Term& t : r.terms) out += " - " + double_literal(-t.coef) + " * x[" + std::to_string(t.dep) + "]";
  }
  out += ";\n";
}

}  // namespace detail

/// Straight-line solver source: one `calculate<k>` function per level, split into
/// `calculate<k>_p<j>` parts when the level's cost exceeds `chunk_flops`. Untouched
/// rows keep the division form, rewritten rows are emitted folded.
inline EmittedKernel emit(const AffineSystem& sys, const LevelSchedule& s,
                          std::optional<Cost> chunk_flops = std::nullopt) {
  EmittedKernel k;
  std::string& out = k.source_text;
  out += "// sparse lower-triangular solve: n=" + std::to_string(sys.n()) +
         ", levels=" + std::to_string(s.num_levels()) + "\n";

  for (std::size_t l = 0; l < s.num_levels(); ++l) {
    const auto& rows = s.levels[l];
    std::vector<std::size_t> cuts{0};
    if (chunk_flops && *chunk_flops > 0 && s.level_costs[l] > *chunk_flops) {
      Cost acc = 0;
      for (std::size_t p = 0; p < rows.size(); ++p) {
        const Cost c = row_cost(sys, rows[p]);
        if (p > cuts.back() && acc + c > *chunk_flops) {
          cuts.push_back(p);
          acc = 0;
        }
        acc += c;
      }
    }
    cuts.push_back(rows.size());

    const bool split = cuts.size() > 2;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
      std::string name = "calculate" + std::to_string(l);
      if (split) name += "_p" + std::to_string(j);
      k.functions.push_back({name, l, cuts[j], cuts[j + 1]});
      out += "\nvoid " + name + "(double* x) {\n";
      for (std::size_t p = cuts[j]; p < cuts[j + 1]; ++p) detail::emit_statement(out, sys, rows[p]);
      out += "}\n";
    }
  }

  out += "\nvoid solve(double* x) {\n";
  for (const auto& f : k.functions) out += "  " + f.name + "(x);\n";
  out += "}\n";
  return k;
}

inline std::size_t code_size(const EmittedKernel& k) { return k.size_bytes(); }

}  // namespace sptrsv
