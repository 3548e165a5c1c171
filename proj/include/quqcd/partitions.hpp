#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "quqcd/errors.hpp"

namespace quqcd {

/// Integer partition written as weakly decreasing positive rows.
/// Doubles as a symmetric-group cycle type.
struct YoungDiagram {
  std::vector<int> rows;

  int boxes() const;
  int height() const { return static_cast<int>(rows.size()); }
  std::string to_string() const;  // "(r1,r2,...)"

  auto operator<=>(const YoungDiagram&) const = default;
};

/// All partitions of ell with at most max_rows rows, in descending
/// lexicographic order, starting at (ell).
std::vector<YoungDiagram> enumerate_young_diagrams(int ell, int max_rows);

/// Irreducible S_ell dimension via the hook length formula. Exact in int64
/// for ell <= 20.
std::int64_t hook_dimension(const YoungDiagram& lambda);

/// Irreducible character chi_lambda evaluated on a cycle type, by the
/// Murnaghan-Nakayama recursion (border-strip removal on beta numbers).
/// Both arguments must partition the same integer.
std::int64_t mn_character(const YoungDiagram& lambda,
                          const YoungDiagram& cycle_type);

}  // namespace quqcd
