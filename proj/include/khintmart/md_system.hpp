#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "khintmart/grid.hpp"
#include "khintmart/rational.hpp"
#include "khintmart/step_function.hpp"

namespace khintmart {

/// Martingale-difference system: functions d_1..d_n together with the
/// partitions D_1..D_n they are adapted to. Level 0 is implicit (one cell,
/// the whole space). Construction checks shape only; the martingale
/// invariants belong to validate(), which reports violations as data.
class MDSystem {
 public:
  MDSystem(GridPtr grid, std::vector<CellLabeling> partitions, std::vector<std::vector<Rational>> values)
      : grid_(std::move(grid)), partitions_(std::move(partitions)), values_(std::move(values)) {
    if (partitions_.empty() || partitions_.size() != values_.size())
      throw Error(ErrorCode::InvalidSystem, "level count mismatch between partitions and differences");
    for (std::size_t k = 0; k < partitions_.size(); ++k) {
      if (partitions_[k].size() != grid_->atom_count() || values_[k].size() != grid_->atom_count())
        throw Error(ErrorCode::InvalidSystem, "per-atom data does not match grid at level " + std::to_string(k + 1));
    }
  }

  std::size_t levels() const { return partitions_.size(); }
  const GridPtr& grid() const { return grid_; }
  std::size_t atom_count() const { return grid_->atom_count(); }

  /// Cell label of `atom` at level k, 0 <= k <= n. Level 0 is the root cell 0.
  std::uint32_t label(std::size_t k, std::size_t atom) const {
    if (k == 0) return 0;
    return partitions_.at(k - 1)[atom];
  }

  const CellLabeling& partition(std::size_t k) const { return partitions_.at(k - 1); }

  /// Value of d_k on `atom`, 1 <= k <= n.
  const Rational& value(std::size_t k, std::size_t atom) const { return values_.at(k - 1).at(atom); }
  const std::vector<Rational>& level_values(std::size_t k) const { return values_.at(k - 1); }

  StepFunction difference(std::size_t k) const { return StepFunction(grid_, values_.at(k - 1)); }

  /// Sum d_1 + ... + d_n as a step function, exact.
  StepFunction total_sum() const {
    std::vector<Rational> sum(atom_count(), Rational(0));
    for (const auto& lvl : values_)
      for (std::size_t a = 0; a < sum.size(); ++a) sum[a] += lvl[a];
    return StepFunction(grid_, std::move(sum));
  }

  bool is_trivial() const {
    for (const auto& lvl : values_)
      for (const auto& v : lvl)
        if (!v.is_zero()) return false;
    return true;
  }

  /// Cells of D_k in increasing id order. k = 0 yields the root cell.
  std::vector<std::pair<std::uint32_t, std::vector<std::size_t>>> level_cells(std::size_t k) const {
    if (k == 0) {
      std::vector<std::size_t> all(atom_count());
      for (std::size_t a = 0; a < all.size(); ++a) all[a] = a;
      return {{0u, std::move(all)}};
    }
    return partitions_.at(k - 1).cells();
  }

  friend bool operator==(const MDSystem& a, const MDSystem& b) {
    return *a.grid_ == *b.grid_ && a.partitions_ == b.partitions_ && a.values_ == b.values_;
  }

 private:
  GridPtr grid_;
  std::vector<CellLabeling> partitions_;
  std::vector<std::vector<Rational>> values_;
};

struct Violation {
  enum class Kind { RefinementChain, Measurability, MeanZero };
  Kind kind;
  std::size_t level;       // level k of d_k / D_k involved
  std::uint32_t cell;      // offending cell id (at level-1 for MeanZero)
  std::string detail;
};

inline const char* violation_kind_name(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::RefinementChain: return "RefinementChain";
    case Violation::Kind::Measurability: return "Measurability";
    case Violation::Kind::MeanZero: return "MeanZero";
  }
  return "Unknown";
}

struct ValidationReport {
  bool valid = true;
  std::vector<Violation> violations;
};

/// Checks the three martingale-difference invariants with exact arithmetic:
/// nested partitions, d_k measurable w.r.t. D_k, and zero mean of d_k on
/// every cell of D_{k-1}. Violations are reported, not thrown.
inline ValidationReport validate(const MDSystem& d) {
  ValidationReport report;
  const std::size_t n = d.levels();

  for (std::size_t k = 2; k <= n; ++k) {
    std::map<std::uint32_t, std::uint32_t> parent_of;
    for (std::size_t a = 0; a < d.atom_count(); ++a) {
      const std::uint32_t child = d.label(k, a);
      const std::uint32_t parent = d.label(k - 1, a);
      auto [it, inserted] = parent_of.emplace(child, parent);
      if (!inserted && it->second != parent) {
        report.violations.push_back({Violation::Kind::RefinementChain, k, child,
                                     "cell straddles cells " + std::to_string(it->second) + " and " +
                                         std::to_string(parent) + " of the previous level"});
      }
    }
  }

  for (std::size_t k = 1; k <= n; ++k) {
    std::map<std::uint32_t, Rational> first_value;
    std::set<std::uint32_t> reported;
    for (std::size_t a = 0; a < d.atom_count(); ++a) {
      const std::uint32_t cell = d.label(k, a);
      auto [it, inserted] = first_value.emplace(cell, d.value(k, a));
      if (!inserted && it->second != d.value(k, a) && reported.insert(cell).second) {
        report.violations.push_back({Violation::Kind::Measurability, k, cell,
                                     "d_" + std::to_string(k) + " not constant on its cell"});
      }
    }
  }

  for (std::size_t k = 1; k <= n; ++k) {
    std::map<std::uint32_t, Rational> integral;
    for (std::size_t a = 0; a < d.atom_count(); ++a)
      integral[d.label(k - 1, a)] += d.value(k, a) * d.grid()->measure(a);
    for (const auto& [cell, total] : integral) {
      if (!total.is_zero()) {
        report.violations.push_back({Violation::Kind::MeanZero, k, cell,
                                     "integral of d_" + std::to_string(k) + " over cell is " + total.to_string()});
      }
    }
  }

  report.valid = report.violations.empty();
  return report;
}

/// Parent of cell `cell_id` of D_k in D_{k-1}; level-1 cells report the root.
inline std::uint32_t parent_cell(const MDSystem& d, std::size_t k, std::uint32_t cell_id) {
  if (k < 1 || k > d.levels()) throw Error(ErrorCode::DomainError, "level out of range");
  for (std::size_t a = 0; a < d.atom_count(); ++a)
    if (d.label(k, a) == cell_id) return d.label(k - 1, a);
  throw Error(ErrorCode::UnknownCell, "no cell " + std::to_string(cell_id) + " at level " + std::to_string(k));
}

namespace detail {

/// True when every cell of D_j for 0 <= j < depth has exactly two children
/// of equal measure. This is the structural half of dyadicity.
inline bool levels_binary_equal(const MDSystem& d, std::size_t depth) {
  for (std::size_t j = 0; j < depth; ++j) {
    std::map<std::uint32_t, std::map<std::uint32_t, Rational>> children;  // parent -> child -> measure
    for (std::size_t a = 0; a < d.atom_count(); ++a)
      children[d.label(j, a)][d.label(j + 1, a)] += d.grid()->measure(a);
    for (const auto& [parent, kids] : children) {
      if (kids.size() != 2) return false;
      if (kids.begin()->second != std::next(kids.begin())->second) return false;
    }
  }
  return true;
}

}  // namespace detail

/// k-dyadic test. k = 0 is vacuous (used by the transform preconditions);
/// k = 1 asks that d_1 take exactly two values; k >= 2 asks that every cell
/// above level k have exactly two children of equal measure.
inline bool is_k_dyadic(const MDSystem& d, std::size_t k) {
  if (k == 0) return true;
  if (k == 1) {
    std::set<Rational> distinct(d.level_values(1).begin(), d.level_values(1).end());
    return distinct.size() == 2;
  }
  if (k > d.levels()) return false;
  return detail::levels_binary_equal(d, k);
}

/// Full structural dyadicity: two equal-measure children at every level.
inline bool is_dyadic(const MDSystem& d) { return detail::levels_binary_equal(d, d.levels()); }

/// Intermediate property between the two T1 transforms: (k-1)-dyadic and
/// |d_k| constant on each cell of D_{k-1} (at the sup value).
inline bool is_ip(const MDSystem& d, std::size_t k) {
  if (k < 1 || k > d.levels()) return false;
  if (!is_k_dyadic(d, k - 1)) return false;
  std::map<std::uint32_t, Rational> modulus;
  for (std::size_t a = 0; a < d.atom_count(); ++a) {
    const Rational m = d.value(k, a).abs();
    auto [it, inserted] = modulus.emplace(d.label(k - 1, a), m);
    if (!inserted && it->second != m) return false;
  }
  return true;
}

/// m-Rademacher test (defined for dyadic systems): on each cell V of
/// D_{m-1} the moduli |d_m|,...,|d_n| all equal one constant c(V).
inline bool is_m_rademacher(const MDSystem& d, std::size_t m) {
  if (m < 1 || m > d.levels()) throw Error(ErrorCode::DomainError, "m out of range");
  if (!is_dyadic(d)) throw Error(ErrorCode::NotDyadic, "m-Rademacher property requires a dyadic system");
  std::map<std::uint32_t, Rational> common;
  for (std::size_t j = m; j <= d.levels(); ++j) {
    for (std::size_t a = 0; a < d.atom_count(); ++a) {
      const Rational mod = d.value(j, a).abs();
      auto [it, inserted] = common.emplace(d.label(m - 1, a), mod);
      if (!inserted && it->second != mod) return false;
    }
  }
  return true;
}

}  // namespace khintmart
