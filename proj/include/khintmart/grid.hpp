#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "khintmart/errors.hpp"
#include "khintmart/rational.hpp"

namespace khintmart {

/// Finest interval decomposition of [0,1). Atom i is [t_i, t_{i+1});
/// breakpoints are strictly increasing exact rationals with t_0 = 0, t_m = 1,
/// so atom measures sum to 1 exactly.
class AtomGrid {
 public:
  explicit AtomGrid(std::vector<Rational> breakpoints) : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.size() < 2 || breakpoints_.front() != Rational(0) || breakpoints_.back() != Rational(1))
      throw Error(ErrorCode::BadEndpoints, "breakpoints must start at 0 and end at 1");
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i)
      if (!(breakpoints_[i] < breakpoints_[i + 1]))
        throw Error(ErrorCode::NonMonotoneBreakpoints, "breakpoints must be strictly increasing");
  }

  std::size_t atom_count() const { return breakpoints_.size() - 1; }
  const Rational& left(std::size_t atom) const { return breakpoints_.at(atom); }
  const Rational& right(std::size_t atom) const { return breakpoints_.at(atom + 1); }
  Rational measure(std::size_t atom) const { return right(atom) - left(atom); }
  const std::vector<Rational>& breakpoints() const { return breakpoints_; }

  friend bool operator==(const AtomGrid& a, const AtomGrid& b) { return a.breakpoints_ == b.breakpoints_; }

 private:
  std::vector<Rational> breakpoints_;
};

using GridPtr = std::shared_ptr<const AtomGrid>;

inline GridPtr make_grid(std::vector<Rational> breakpoints) {
  return std::make_shared<AtomGrid>(std::move(breakpoints));
}

/// Uniform grid with `atoms` equal atoms.
inline GridPtr make_uniform_grid(std::size_t atoms) {
  std::vector<Rational> bps;
  bps.reserve(atoms + 1);
  for (std::size_t i = 0; i <= atoms; ++i) bps.push_back(Rational(static_cast<long>(i), static_cast<long>(atoms)));
  return make_grid(std::move(bps));
}

/// One nonnegative cell id per atom. A cell is the set of atoms sharing a
/// label; cells are measurable unions of atoms and need not be intervals.
struct CellLabeling {
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return labels.size(); }
  std::uint32_t operator[](std::size_t atom) const { return labels.at(atom); }

  /// Cells in increasing id order, each with its atom indices in grid order.
  std::vector<std::pair<std::uint32_t, std::vector<std::size_t>>> cells() const {
    std::map<std::uint32_t, std::vector<std::size_t>> by_id;
    for (std::size_t a = 0; a < labels.size(); ++a) by_id[labels[a]].push_back(a);
    return {by_id.begin(), by_id.end()};
  }

  friend bool operator==(const CellLabeling& a, const CellLabeling& b) { return a.labels == b.labels; }
};

struct RefineResult {
  GridPtr common;
  std::vector<std::size_t> from_a;  // containing atom of `a` per common atom
  std::vector<std::size_t> from_b;  // containing atom of `b` per common atom
};

/// Common refinement: breakpoint set is the union of both sets. The index
/// maps are surjective and order-preserving by construction.
inline RefineResult refine(const AtomGrid& a, const AtomGrid& b) {
  std::vector<Rational> merged;
  merged.reserve(a.breakpoints().size() + b.breakpoints().size());
  std::merge(a.breakpoints().begin(), a.breakpoints().end(),
             b.breakpoints().begin(), b.breakpoints().end(), std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  RefineResult out;
  out.common = make_grid(std::move(merged));
  const std::size_t m = out.common->atom_count();
  out.from_a.resize(m);
  out.from_b.resize(m);
  std::size_t ia = 0, ib = 0;
  for (std::size_t c = 0; c < m; ++c) {
    while (!(out.common->left(c) < a.right(ia))) ++ia;
    while (!(out.common->left(c) < b.right(ib))) ++ib;
    out.from_a[c] = ia;
    out.from_b[c] = ib;
  }
  return out;
}

/// Splits atom [a,b) at c = (1-ratio)a + ratio*b. Degenerate ratios 0 and 1
/// return the input grid unchanged; no empty atom is ever produced.
inline GridPtr split_atom(const GridPtr& g, std::size_t atom, const Rational& ratio) {
  if (atom >= g->atom_count())
    throw Error(ErrorCode::AtomIndexOutOfRange, "atom index " + std::to_string(atom));
  if (ratio < Rational(0) || ratio > Rational(1))
    throw Error(ErrorCode::DomainError, "split ratio outside [0,1]");
  if (ratio.is_zero() || ratio == Rational(1)) return g;
  const Rational c = (Rational(1) - ratio) * g->left(atom) + ratio * g->right(atom);
  std::vector<Rational> bps = g->breakpoints();
  bps.insert(bps.begin() + static_cast<std::ptrdiff_t>(atom) + 1, c);
  return make_grid(std::move(bps));
}

}  // namespace khintmart
