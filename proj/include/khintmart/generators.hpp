#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "khintmart/md_system.hpp"
#include "khintmart/rng.hpp"

namespace khintmart {

/// Builds the dyadic system whose level-k difference is the k-th Haar scale
/// sum_{j=2^{k-1}+1}^{2^k} a_j h_j, with the unnormalized Haar functions
/// h_j in {-1,0,1}. The coefficient sequence must be a full dyadic block
/// a_1..a_{2^{K+1}}; a_1 multiplies the constant h_1 and does not enter the
/// differences. The all-zero input is a valid (trivial) system.
inline MDSystem from_haar_coeffs(const std::vector<Rational>& coeffs) {
  const std::size_t count = coeffs.size();
  if (count < 2 || (count & (count - 1)) != 0)
    throw Error(ErrorCode::BadCoefficientCount, "need a full dyadic block of 2^(K+1) coefficients");
  std::size_t n = 0;
  while ((std::size_t{1} << (n + 1)) < count) ++n;
  ++n;  // count == 2^n, levels 1..n
  const std::size_t atoms = count;
  GridPtr grid = make_uniform_grid(atoms);

  std::vector<CellLabeling> partitions;
  std::vector<std::vector<Rational>> values;
  for (std::size_t k = 1; k <= n; ++k) {
    CellLabeling part;
    part.labels.resize(atoms);
    for (std::size_t a = 0; a < atoms; ++a) part.labels[a] = static_cast<std::uint32_t>(a >> (n - k));
    partitions.push_back(std::move(part));

    // Scale k uses Haar indices 2^(k-1)+1 .. 2^k; index 2^(k-1)+j has
    // support [(j-1)/2^(k-1), j/2^(k-1)) split into a +half and a -half.
    std::vector<Rational> level(atoms, Rational(0));
    const std::size_t scale_cells = std::size_t{1} << (k - 1);
    const std::size_t block = atoms / scale_cells;  // atoms per support
    for (std::size_t j = 1; j <= scale_cells; ++j) {
      const Rational& a_j = coeffs[scale_cells + j - 1];  // 1-based a_{2^{k-1}+j}
      const std::size_t start = (j - 1) * block;
      for (std::size_t t = 0; t < block; ++t) level[start + t] = (t < block / 2) ? a_j : -a_j;
    }
    values.push_back(std::move(level));
  }
  return MDSystem(std::move(grid), std::move(partitions), std::move(values));
}

/// Rademacher martingale d_k = a_k r_k on the uniform 2^n grid.
inline MDSystem from_rademacher_coeffs(const std::vector<Rational>& coeffs) {
  const std::size_t n = coeffs.size();
  if (n == 0) throw Error(ErrorCode::BadCoefficientCount, "need at least one coefficient");
  const std::size_t atoms = std::size_t{1} << n;
  GridPtr grid = make_uniform_grid(atoms);
  std::vector<CellLabeling> partitions;
  std::vector<std::vector<Rational>> values;
  for (std::size_t k = 1; k <= n; ++k) {
    CellLabeling part;
    part.labels.resize(atoms);
    std::vector<Rational> level(atoms);
    for (std::size_t a = 0; a < atoms; ++a) {
      part.labels[a] = static_cast<std::uint32_t>(a >> (n - k));
      const bool minus = (a >> (n - k)) & 1u;
      level[a] = minus ? -coeffs[k - 1] : coeffs[k - 1];
    }
    partitions.push_back(std::move(part));
    values.push_back(std::move(level));
  }
  return MDSystem(std::move(grid), std::move(partitions), std::move(values));
}

/// One independent symmetric discrete variable: values with probabilities.
using SymmetricVariable = std::vector<std::pair<Rational, Rational>>;

/// Realizes a finite sequence of independent symmetric variables as an
/// MD-system on nested interval partitions of [0,1). Each variable must
/// have positive weights summing to one and a value multiset closed under
/// negation with matching weights.
inline MDSystem from_independent_symmetric(const std::vector<SymmetricVariable>& variables) {
  if (variables.empty()) throw Error(ErrorCode::DomainError, "need at least one variable");
  for (const auto& var : variables) {
    Rational total(0);
    std::map<Rational, Rational> weight;
    for (const auto& [value, prob] : var) {
      if (prob.sign() <= 0) throw Error(ErrorCode::NotProbability, "weights must be positive");
      total += prob;
      weight[value] += prob;
    }
    if (total != Rational(1)) throw Error(ErrorCode::NotProbability, "weights sum to " + total.to_string());
    for (const auto& [value, prob] : weight) {
      auto it = weight.find(-value);
      if (it == weight.end() || it->second != prob)
        throw Error(ErrorCode::NotSymmetric, "value " + value.to_string() + " lacks a matching negation");
    }
  }

  struct Cell {
    Rational left;
    Rational width;
  };
  std::vector<Cell> cells = {{Rational(0), Rational(1)}};
  std::vector<std::vector<Rational>> cell_values;  // per level, value per cell
  std::vector<std::vector<std::size_t>> parents;   // per level, parent cell per cell
  for (const auto& var : variables) {
    std::vector<Cell> next;
    std::vector<Rational> vals;
    std::vector<std::size_t> par;
    next.reserve(cells.size() * var.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      Rational cursor = cells[c].left;
      for (const auto& [value, prob] : var) {
        const Rational w = cells[c].width * prob;
        next.push_back({cursor, w});
        vals.push_back(value);
        par.push_back(c);
        cursor += w;
      }
    }
    cells = std::move(next);
    cell_values.push_back(std::move(vals));
    parents.push_back(std::move(par));
  }

  // Leaves of the product construction are the atoms, in coordinate order.
  const std::size_t n = variables.size();
  const std::size_t atoms = cells.size();
  std::vector<Rational> bps;
  bps.reserve(atoms + 1);
  for (const auto& c : cells) bps.push_back(c.left);
  bps.push_back(Rational(1));
  GridPtr grid = make_grid(std::move(bps));

  // Ancestor cell index of each atom at every level.
  std::vector<std::vector<std::size_t>> ancestor(n + 1);
  ancestor[n].resize(atoms);
  for (std::size_t a = 0; a < atoms; ++a) ancestor[n][a] = a;
  for (std::size_t k = n; k >= 1; --k) {
    ancestor[k - 1].resize(atoms);
    for (std::size_t a = 0; a < atoms; ++a) ancestor[k - 1][a] = parents[k - 1][ancestor[k][a]];
  }

  std::vector<CellLabeling> partitions;
  std::vector<std::vector<Rational>> values;
  for (std::size_t k = 1; k <= n; ++k) {
    CellLabeling part;
    part.labels.resize(atoms);
    std::vector<Rational> level(atoms, Rational(0));
    for (std::size_t a = 0; a < atoms; ++a) {
      part.labels[a] = static_cast<std::uint32_t>(ancestor[k][a]);
      level[a] = cell_values[k - 1][ancestor[k][a]];
    }
    partitions.push_back(std::move(part));
    values.push_back(std::move(level));
  }
  return MDSystem(std::move(grid), std::move(partitions), std::move(values));
}

namespace detail {

inline Rational draw_nonzero_rational(std::mt19937_64& rng, long bound, long max_den = 8) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    Rational v = draw_rational(rng, bound, max_den);
    if (!v.is_zero()) return v;
  }
  return Rational(1);
}

/// Shared random builder. The first `dyadic_levels` levels split each cell
/// at its midpoint with +/-v values; the remaining levels draw 2..max_children
/// children at random rational cuts and solve the last child value for mean
/// zero. No level is ever identically zero on a parent cell, so envelopes
/// stay positive and downstream transforms never hit degenerate cells.
inline MDSystem random_md_impl(std::size_t n, std::size_t dyadic_levels, std::size_t max_children,
                               long value_bound, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::DomainError, "need n >= 1");
  if (max_children < 2) throw Error(ErrorCode::DomainError, "need max_children >= 2");
  if (value_bound < 1) throw Error(ErrorCode::DomainError, "need value_bound >= 1");
  std::mt19937_64 rng(splitmix64(seed));

  struct Cell {
    Rational left;
    Rational width;
  };
  std::vector<Cell> cells = {{Rational(0), Rational(1)}};
  std::vector<std::vector<Rational>> cell_values;   // per level, per cell
  std::vector<std::vector<std::size_t>> parents;    // per level, per cell

  for (std::size_t k = 1; k <= n; ++k) {
    const bool dyadic = k <= dyadic_levels;
    std::vector<Cell> next;
    std::vector<Rational> vals;
    std::vector<std::size_t> par;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cell& parent = cells[c];
      if (dyadic) {
        const Rational half = parent.width / Rational(2);
        const Rational v = draw_nonzero_rational(rng, value_bound);
        next.push_back({parent.left, half});
        next.push_back({parent.left + half, half});
        vals.push_back(v);
        vals.push_back(-v);
        par.push_back(c);
        par.push_back(c);
        continue;
      }
      const std::size_t children = static_cast<std::size_t>(draw_int(rng, 2, static_cast<long>(max_children)));
      const long denom = draw_int(rng, static_cast<long>(children), static_cast<long>(children) + 8);
      std::set<long> cuts;
      while (cuts.size() < children - 1) cuts.insert(draw_int(rng, 1, denom - 1));
      std::vector<Rational> fractions = {Rational(0)};
      for (long cut : cuts) fractions.push_back(Rational(cut, denom));
      fractions.push_back(Rational(1));

      std::vector<Rational> widths(children);
      std::vector<Rational> drawn(children);
      for (std::size_t i = 0; i < children; ++i)
        widths[i] = parent.width * (fractions[i + 1] - fractions[i]);
      bool all_zero = true;
      Rational weighted(0);
      for (std::size_t i = 0; i + 1 < children; ++i) {
        drawn[i] = draw_rational(rng, value_bound);
        if (!drawn[i].is_zero()) all_zero = false;
        weighted += drawn[i] * widths[i];
      }
      if (all_zero) {
        drawn[0] = Rational(1);
        weighted = drawn[0] * widths[0];
      }
      drawn[children - 1] = -weighted / widths[children - 1];

      Rational cursor = parent.left;
      for (std::size_t i = 0; i < children; ++i) {
        next.push_back({cursor, widths[i]});
        vals.push_back(drawn[i]);
        par.push_back(c);
        cursor += widths[i];
      }
    }
    cells = std::move(next);
    cell_values.push_back(std::move(vals));
    parents.push_back(std::move(par));
  }

  const std::size_t atoms = cells.size();
  std::vector<Rational> bps;
  bps.reserve(atoms + 1);
  for (const auto& c : cells) bps.push_back(c.left);
  bps.push_back(Rational(1));
  GridPtr grid = make_grid(std::move(bps));

  std::vector<std::vector<std::size_t>> ancestor(n + 1);
  ancestor[n].resize(atoms);
  for (std::size_t a = 0; a < atoms; ++a) ancestor[n][a] = a;
  for (std::size_t k = n; k >= 1; --k) {
    ancestor[k - 1].resize(atoms);
    for (std::size_t a = 0; a < atoms; ++a) ancestor[k - 1][a] = parents[k - 1][ancestor[k][a]];
  }

  std::vector<CellLabeling> partitions;
  std::vector<std::vector<Rational>> values;
  for (std::size_t k = 1; k <= n; ++k) {
    CellLabeling part;
    part.labels.resize(atoms);
    std::vector<Rational> level(atoms, Rational(0));
    for (std::size_t a = 0; a < atoms; ++a) {
      part.labels[a] = static_cast<std::uint32_t>(ancestor[k][a]);
      level[a] = cell_values[k - 1][ancestor[k][a]];
    }
    partitions.push_back(std::move(part));
    values.push_back(std::move(level));
  }
  return MDSystem(std::move(grid), std::move(partitions), std::move(values));
}

}  // namespace detail

/// Random valid MD-system: children counts uniform in [2, max_children],
/// cells split at random rational points, all but one child value drawn
/// uniformly from small-denominator rationals in [-value_bound, value_bound],
/// the last child value solving the zero-sum equation. Deterministic in seed.
inline MDSystem random_md(std::size_t n, std::size_t max_children, long value_bound, std::uint64_t seed) {
  return detail::random_md_impl(n, 0, max_children, value_bound, seed);
}

/// Random system whose first `dyadic_levels` levels are dyadic (two equal
/// children, +/-v values); the rest are general. dyadic_levels = k-1 gives
/// the (k-1)-dyadic inputs the R1 transform expects.
inline MDSystem random_prefix_dyadic_md(std::size_t n, std::size_t dyadic_levels, std::size_t max_children,
                                        long value_bound, std::uint64_t seed) {
  return detail::random_md_impl(n, std::min(dyadic_levels, n), max_children, value_bound, seed);
}

/// Fully dyadic random system (random Haar-type coefficients).
inline MDSystem random_dyadic_md(std::size_t n, long value_bound, std::uint64_t seed) {
  return detail::random_md_impl(n, n, 2, value_bound, seed);
}

}  // namespace khintmart
