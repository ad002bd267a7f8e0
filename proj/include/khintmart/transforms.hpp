#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "khintmart/md_system.hpp"
#include "khintmart/norms.hpp"
#include "khintmart/square_functions.hpp"

namespace khintmart {

enum class PointwiseRelation { equal, decreased, incomparable };

inline const char* pointwise_relation_name(PointwiseRelation r) {
  switch (r) {
    case PointwiseRelation::equal: return "equal";
    case PointwiseRelation::decreased: return "decreased";
    case PointwiseRelation::incomparable: return "incomparable";
  }
  return "unknown";
}

struct SystemSummary {
  double pnorm = 0;
  Rational sup_cww_sq;
  std::size_t levels = 0;
  std::size_t atoms = 0;
  bool valid = false;
  bool trivial = false;
};

inline SystemSummary summarize(const MDSystem& d, double p) {
  SystemSummary s;
  s.pnorm = pnorm_sum(d, p);
  s.sup_cww_sq = square_cww(d).sup_sq;
  s.levels = d.levels();
  s.atoms = d.atom_count();
  s.valid = validate(d).valid;
  s.trivial = d.is_trivial();
  return s;
}

/// Before/after certificate emitted by every proof transform. Flags record
/// whether each exact certificate held; `passed` is the conjunction of the
/// certificates the transform promises.
struct TransformReport {
  std::string kind;
  std::size_t level = 0;  // the k (R1/R2) or m (procedures) parameter
  double p = 0;
  SystemSummary before;
  SystemSummary after;
  PointwiseRelation relation = PointwiseRelation::incomparable;
  double pnorm_delta = 0;
  bool pnorm_nondecreasing = false;  // within 1e-12

  bool after_valid = false;
  bool cww_pointwise_equal = false;       // R1: exact, on the refined grid
  bool integrals_preserved = false;       // R1: per finest cell, exact
  bool output_ip = false;                 // R1
  bool cww_correspondence_equal = false;  // R2: exact under the copy map
  bool output_k_dyadic = false;           // R2
  bool sup_nonincreasing = false;         // R2: exact
  bool sup_preserved = false;             // procedures: exact / within c' bound
  bool output_rademacher_step = false;    // procedure 2: (m-1)-Rademacher
  double cprime_rel_error_bound = 0;      // procedure 2
  std::vector<std::string> notes;
  bool passed = false;
};

namespace detail {

constexpr double kPnormTolerance = 1e-12;

inline void require_valid(const MDSystem& d, const char* who) {
  if (!validate(d).valid) throw Error(ErrorCode::InvalidSystem, std::string(who) + " requires a valid MD-system");
}

/// Exact pointwise comparison of the squared CWW square functions on the
/// common refinement of the two grids.
inline PointwiseRelation compare_cww_pointwise(const MDSystem& before, const MDSystem& after) {
  const SquareFunctionResult sb = square_cww(before);
  const SquareFunctionResult sa = square_cww(after);
  const RefineResult r = refine(*before.grid(), *after.grid());
  bool all_equal = true;
  bool all_le = true;
  for (std::size_t c = 0; c < r.common->atom_count(); ++c) {
    const Rational& vb = sb.pointwise_sq.value(r.from_a[c]);
    const Rational& va = sa.pointwise_sq.value(r.from_b[c]);
    if (va != vb) all_equal = false;
    if (va > vb) all_le = false;
  }
  if (all_equal) return PointwiseRelation::equal;
  if (all_le) return PointwiseRelation::decreased;
  return PointwiseRelation::incomparable;
}

inline bool pnorm_nondecreasing(const SystemSummary& before, const SystemSummary& after) {
  return after.pnorm - before.pnorm >= -kPnormTolerance * std::max(1.0, before.pnorm);
}

}  // namespace detail

/// R1: turns a (k-1)-dyadic system into one with the IP property at level k
/// by replacing d_k with the +/-envelope, splitting every finest atom at the
/// ratio lambda = (1 + xi/env)/2 of its D_k cell. Degenerate ratios produce
/// no empty atoms. Exact certificates: S^2 pointwise unchanged, d_k cell
/// integrals unchanged, p-norm does not decrease.
inline std::pair<MDSystem, TransformReport> r1_transform(const MDSystem& d, std::size_t k, double p) {
  detail::require_valid(d, "r1_transform");
  const std::size_t n = d.levels();
  if (k < 1 || k > n) throw Error(ErrorCode::DomainError, "r1_transform level out of range");
  if (!is_k_dyadic(d, k - 1))
    throw Error(ErrorCode::NotKMinus1Dyadic, "r1_transform requires a (k-1)-dyadic input at k=" + std::to_string(k));

  const StepFunction env = envelope(d, k);

  // Per-atom split ratio; shared by all atoms of one D_k cell.
  struct Piece {
    std::size_t source;
    bool minus;
  };
  std::vector<Rational> bps;
  std::vector<Piece> pieces;
  bps.push_back(Rational(0));
  for (std::size_t a = 0; a < d.atom_count(); ++a) {
    const Rational& e = env.value(a);
    const Rational& xi = d.value(k, a);
    Rational lambda(1);
    if (e.is_zero()) {
      if (!xi.is_zero())
        throw Error(ErrorCode::ZeroEnvelopeCell, "zero envelope with nonzero d_k; input is corrupt");
    } else {
      lambda = (Rational(1) + xi / e) / Rational(2);
    }
    if (lambda.is_zero()) {
      pieces.push_back({a, true});
      bps.push_back(d.grid()->right(a));
    } else if (lambda == Rational(1)) {
      pieces.push_back({a, false});
      bps.push_back(d.grid()->right(a));
    } else {
      const Rational cut = (Rational(1) - lambda) * d.grid()->left(a) + lambda * d.grid()->right(a);
      pieces.push_back({a, false});
      bps.push_back(cut);
      pieces.push_back({a, true});
      bps.push_back(d.grid()->right(a));
    }
  }
  GridPtr grid = make_grid(std::move(bps));

  const std::size_t atoms = pieces.size();
  std::vector<CellLabeling> partitions(n);
  std::vector<std::vector<Rational>> values(n);
  for (std::size_t j = 1; j <= n; ++j) {
    partitions[j - 1].labels.resize(atoms);
    values[j - 1].resize(atoms);
    for (std::size_t i = 0; i < atoms; ++i) {
      const auto [src, minus] = pieces[i];
      partitions[j - 1].labels[i] = (j < k) ? d.label(j, src)
                                            : 2 * d.label(j, src) + (minus ? 1u : 0u);
      if (j == k)
        values[j - 1][i] = minus ? -env.value(src) : env.value(src);
      else
        values[j - 1][i] = d.value(j, src);
    }
  }
  MDSystem out(grid, std::move(partitions), std::move(values));

  TransformReport rep;
  rep.kind = "r1";
  rep.level = k;
  rep.p = p;
  rep.before = summarize(d, p);
  rep.after = summarize(out, p);
  rep.after_valid = rep.after.valid;
  rep.output_ip = is_ip(out, k);
  rep.pnorm_delta = rep.after.pnorm - rep.before.pnorm;
  rep.pnorm_nondecreasing = detail::pnorm_nondecreasing(rep.before, rep.after);

  // Exact per-finest-cell integral preservation of the k-th difference;
  // checked per source atom, which refines the finest cells.
  std::map<std::size_t, Rational> new_integral;
  for (std::size_t i = 0; i < atoms; ++i)
    new_integral[pieces[i].source] += out.value(k, i) * grid->measure(i);
  rep.integrals_preserved = true;
  for (std::size_t a = 0; a < d.atom_count(); ++a) {
    if (new_integral[a] != d.value(k, a) * d.grid()->measure(a)) {
      rep.integrals_preserved = false;
      break;
    }
  }

  // Exact pointwise equality of the squared square functions.
  {
    const SquareFunctionResult sb = square_cww(d);
    const SquareFunctionResult sa = square_cww(out);
    rep.cww_pointwise_equal = sb.sup_sq == sa.sup_sq;
    for (std::size_t i = 0; i < atoms && rep.cww_pointwise_equal; ++i)
      if (sa.pointwise_sq.value(i) != sb.pointwise_sq.value(pieces[i].source)) rep.cww_pointwise_equal = false;
    rep.relation = rep.cww_pointwise_equal ? PointwiseRelation::equal : detail::compare_cww_pointwise(d, out);
  }

  rep.passed = rep.after_valid && rep.output_ip && rep.integrals_preserved && rep.cww_pointwise_equal &&
               rep.pnorm_nondecreasing;
  return {std::move(out), std::move(rep)};
}

namespace detail {

/// Intermediate form used by R2: atoms of the input, possibly halved inside
/// cells where d_k vanishes, with a forced sign class on the halves.
struct R2Prepared {
  MDSystem system;
  std::vector<int> cls;  // +1 / -1 sign class per atom
};

inline R2Prepared r2_prepare(const MDSystem& d, std::size_t k) {
  const std::size_t n = d.levels();
  const StepFunction env = envelope(d, k);
  bool any_zero = false;
  for (std::size_t a = 0; a < d.atom_count(); ++a)
    if (env.value(a).is_zero()) any_zero = true;

  if (!any_zero) {
    std::vector<int> cls(d.atom_count());
    for (std::size_t a = 0; a < d.atom_count(); ++a) cls[a] = d.value(k, a).sign();
    return {d, std::move(cls)};
  }

  // Halve every atom below a vanishing envelope so the affected cells of
  // D_{k-1} still acquire two equal-measure children at level k.
  struct Piece {
    std::size_t source;
    int cls;  // 0 = untouched, +/-1 = forced half
  };
  std::vector<Rational> bps;
  std::vector<Piece> pieces;
  bps.push_back(Rational(0));
  for (std::size_t a = 0; a < d.atom_count(); ++a) {
    if (env.value(a).is_zero()) {
      const Rational mid = (d.grid()->left(a) + d.grid()->right(a)) / Rational(2);
      pieces.push_back({a, +1});
      bps.push_back(mid);
      pieces.push_back({a, -1});
      bps.push_back(d.grid()->right(a));
    } else {
      pieces.push_back({a, 0});
      bps.push_back(d.grid()->right(a));
    }
  }
  GridPtr grid = make_grid(std::move(bps));
  const std::size_t atoms = pieces.size();
  std::vector<CellLabeling> partitions(n);
  std::vector<std::vector<Rational>> values(n);
  for (std::size_t j = 1; j <= n; ++j) {
    partitions[j - 1].labels.resize(atoms);
    values[j - 1].resize(atoms);
    for (std::size_t i = 0; i < atoms; ++i) {
      const auto [src, c] = pieces[i];
      partitions[j - 1].labels[i] = (j < k) ? d.label(j, src)
                                            : 2 * d.label(j, src) + (c < 0 ? 1u : 0u);
      values[j - 1][i] = d.value(j, src);
    }
  }
  std::vector<int> cls(atoms);
  for (std::size_t i = 0; i < atoms; ++i)
    cls[i] = pieces[i].cls != 0 ? pieces[i].cls : d.value(k, pieces[i].source).sign();
  return {MDSystem(grid, std::move(partitions), std::move(values)), std::move(cls)};
}

}  // namespace detail

/// R2: turns an IP-at-k system into a k-dyadic one. Each cell V of D_{k-1}
/// splits into the sign classes V+ = {d_k = +sup}, V- = {d_k = -sup} (equal
/// measure by the zero mean), and the subtree below the class cell with the
/// largest p-mean of |sum d_j| is copied onto every sibling cell of the same
/// class by measure-proportional dilation. Ties pick the leftmost cell.
inline std::pair<MDSystem, TransformReport> r2_transform(const MDSystem& d, std::size_t k, double p) {
  detail::require_valid(d, "r2_transform");
  const std::size_t n = d.levels();
  if (k < 1 || k > n) throw Error(ErrorCode::DomainError, "r2_transform level out of range");
  if (!is_ip(d, k)) throw Error(ErrorCode::NotIP, "r2_transform requires the IP property at k=" + std::to_string(k));

  detail::R2Prepared prep = detail::r2_prepare(d, k);
  const MDSystem& base = prep.system;
  const StepFunction f = base.total_sum();

  // Candidate cells of D_k grouped by (V, class), in coordinate order.
  struct Candidate {
    std::vector<std::size_t> atoms;
    double weight = 0;  // (1/|J|) * integral of |f|^p over J
  };
  struct ClassGroup {
    std::vector<Candidate> candidates;
    std::size_t best = 0;
  };
  // key: (cell of D_{k-1}, class)
  std::map<std::pair<std::uint32_t, int>, ClassGroup> groups;
  {
    std::map<std::uint32_t, Candidate> by_cell;
    for (std::size_t a = 0; a < base.atom_count(); ++a) by_cell[base.label(k, a)].atoms.push_back(a);
    std::vector<std::pair<std::uint32_t, Candidate>> ordered(by_cell.begin(), by_cell.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& x, const auto& y) { return x.second.atoms.front() < y.second.atoms.front(); });
    for (auto& [cell, cand] : ordered) {
      const std::size_t first = cand.atoms.front();
      const int cls = prep.cls[first];
      for (std::size_t a : cand.atoms) {
        if (prep.cls[a] != cls)
          throw Error(ErrorCode::NotIP, "sign class not constant on a D_k cell; input is corrupt");
      }
      Rational measure(0);
      detail::KahanSum acc;
      for (std::size_t a : cand.atoms) {
        measure += base.grid()->measure(a);
        const double v = std::fabs(f.value(a).to_double());
        acc.add((v == 0.0 ? 0.0 : std::pow(v, p)) * base.grid()->measure(a).to_double());
      }
      cand.weight = acc.value() / measure.to_double();
      groups[{base.label(k - 1, first), cls}].candidates.push_back(std::move(cand));
    }
  }
  for (auto& [key, group] : groups) {
    if (group.candidates.empty()) throw Error(ErrorCode::EmptySignClass, "a sign class has no cells; input is corrupt");
    for (std::size_t i = 1; i < group.candidates.size(); ++i)
      if (group.candidates[i].weight > group.candidates[group.best].weight) group.best = i;
  }
  // Both classes must be present under every V.
  for (const auto& [key, group] : groups) {
    if (groups.find({key.first, -key.second}) == groups.end())
      throw Error(ErrorCode::EmptySignClass,
                  "cell " + std::to_string(key.first) + " never attains one signed extreme");
  }

  // Measure-proportional dilation of the winning cell onto each candidate.
  struct Piece {
    std::size_t target;  // atom of `base` supplying the coordinates
    std::size_t source;  // atom of `base` supplying levels > k
    Rational measure;
  };
  std::vector<std::vector<Piece>> pieces_by_target(base.atom_count());
  for (const auto& [key, group] : groups) {
    const Candidate& best = group.candidates[group.best];
    Rational best_measure(0);
    for (std::size_t a : best.atoms) best_measure += base.grid()->measure(a);
    for (const Candidate& target : group.candidates) {
      Rational target_measure(0);
      for (std::size_t a : target.atoms) target_measure += base.grid()->measure(a);
      const Rational rho = target_measure / best_measure;
      // Walk both measure profiles in lockstep.
      std::size_t ti = 0, si = 0;
      Rational t_used(0), s_used(0);  // consumed measure of current atoms
      while (ti < target.atoms.size()) {
        const Rational t_left = base.grid()->measure(target.atoms[ti]) - t_used;
        const Rational s_left = base.grid()->measure(best.atoms[si]) * rho - s_used;
        const Rational step = std::min(t_left, s_left);
        pieces_by_target[target.atoms[ti]].push_back({target.atoms[ti], best.atoms[si], step});
        t_used += step;
        s_used += step;
        if (t_used == base.grid()->measure(target.atoms[ti])) {
          ++ti;
          t_used = Rational(0);
        }
        if (si + 1 < best.atoms.size() && s_used == base.grid()->measure(best.atoms[si]) * rho) {
          ++si;
          s_used = Rational(0);
        }
      }
    }
  }

  // Assemble the new grid in coordinate order.
  std::vector<Rational> bps;
  std::vector<Piece> pieces;
  bps.push_back(Rational(0));
  for (std::size_t a = 0; a < base.atom_count(); ++a) {
    Rational cursor = base.grid()->left(a);
    for (const Piece& piece : pieces_by_target[a]) {
      cursor += piece.measure;
      pieces.push_back(piece);
      bps.push_back(cursor);
    }
  }
  GridPtr grid = make_grid(std::move(bps));
  const std::size_t atoms = pieces.size();

  // Fresh contiguous labels for levels > k, keyed by (V, class, source cell).
  std::vector<std::map<std::tuple<std::uint32_t, int, std::uint32_t>, std::uint32_t>> fresh(n + 1);
  std::vector<CellLabeling> partitions(n);
  std::vector<std::vector<Rational>> values(n);
  for (std::size_t j = 1; j <= n; ++j) {
    partitions[j - 1].labels.resize(atoms);
    values[j - 1].resize(atoms);
    for (std::size_t i = 0; i < atoms; ++i) {
      const Piece& piece = pieces[i];
      if (j < k) {
        partitions[j - 1].labels[i] = base.label(j, piece.target);
        values[j - 1][i] = base.value(j, piece.target);
      } else if (j == k) {
        const int cls = prep.cls[piece.target];
        partitions[j - 1].labels[i] = 2 * base.label(k - 1, piece.target) + (cls < 0 ? 1u : 0u);
        values[j - 1][i] = base.value(k, piece.target);
      } else {
        const std::tuple<std::uint32_t, int, std::uint32_t> key{base.label(k - 1, piece.target),
                                                                prep.cls[piece.target], base.label(j, piece.source)};
        auto [it, inserted] = fresh[j].emplace(key, static_cast<std::uint32_t>(fresh[j].size()));
        partitions[j - 1].labels[i] = it->second;
        values[j - 1][i] = base.value(j, piece.source);
      }
    }
  }
  MDSystem out(grid, std::move(partitions), std::move(values));

  TransformReport rep;
  rep.kind = "r2";
  rep.level = k;
  rep.p = p;
  rep.before = summarize(d, p);
  rep.after = summarize(out, p);
  rep.after_valid = rep.after.valid;
  rep.output_k_dyadic = is_k_dyadic(out, k);
  rep.pnorm_delta = rep.after.pnorm - rep.before.pnorm;
  rep.pnorm_nondecreasing = detail::pnorm_nondecreasing(rep.before, rep.after);
  rep.sup_nonincreasing = rep.after.sup_cww_sq <= rep.before.sup_cww_sq;

  // Exact equality of S^2 under the copy correspondence: each new atom's
  // value equals the base system's value at its source atom.
  {
    const SquareFunctionResult sbase = square_cww(base);
    const SquareFunctionResult safter = square_cww(out);
    rep.cww_correspondence_equal = true;
    for (std::size_t i = 0; i < atoms; ++i) {
      if (safter.pointwise_sq.value(i) != sbase.pointwise_sq.value(pieces[i].source)) {
        rep.cww_correspondence_equal = false;
        break;
      }
    }
  }
  rep.relation = detail::compare_cww_pointwise(d, out);

  rep.passed = rep.after_valid && rep.output_k_dyadic && rep.cww_correspondence_equal && rep.sup_nonincreasing &&
               rep.pnorm_nondecreasing;
  return {std::move(out), std::move(rep)};
}

namespace detail {

/// The two children of a cell (given as its atom list) at `child_level`, in
/// coordinate order. Throws unless there are exactly two.
inline std::array<std::vector<std::size_t>, 2> two_children(const MDSystem& d,
                                                            const std::vector<std::size_t>& cell_atoms,
                                                            std::size_t child_level) {
  std::map<std::uint32_t, std::vector<std::size_t>> kids;
  for (std::size_t a : cell_atoms) kids[d.label(child_level, a)].push_back(a);
  if (kids.size() != 2) throw Error(ErrorCode::NotDyadic, "cell does not have exactly two children");
  std::vector<std::pair<std::uint32_t, std::vector<std::size_t>>> ordered(kids.begin(), kids.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& x, const auto& y) { return x.second.front() < y.second.front(); });
  return {std::move(ordered[0].second), std::move(ordered[1].second)};
}

/// Common modulus of d_j over `atoms` for all j in [lo, hi]; nullopt when the
/// moduli are not a single constant.
inline std::optional<Rational> common_modulus(const MDSystem& d, const std::vector<std::size_t>& atoms,
                                              std::size_t lo, std::size_t hi) {
  std::optional<Rational> c;
  for (std::size_t j = lo; j <= hi; ++j) {
    for (std::size_t a : atoms) {
      const Rational m = d.value(j, a).abs();
      if (!c)
        c = m;
      else if (*c != m)
        return std::nullopt;
    }
  }
  return c;
}

/// Writes a fresh +/-modulus pattern on levels [lo, hi] over `atoms`:
/// within each cell of D_{j-1}, the first child gets +modulus and the second
/// -modulus. Assumes the dyadic structure below `atoms`.
inline void fill_sign_patterns(const MDSystem& d, std::vector<std::vector<Rational>>& values,
                               const std::vector<std::size_t>& atoms, std::size_t lo, std::size_t hi,
                               const Rational& modulus) {
  for (std::size_t j = lo; j <= hi; ++j) {
    std::map<std::uint32_t, std::vector<std::size_t>> parents;
    for (std::size_t a : atoms) parents[d.label(j - 1, a)].push_back(a);
    for (auto& [parent, cell_atoms] : parents) {
      auto kids = two_children(d, cell_atoms, j);
      for (std::size_t a : kids[0]) values[j - 1][a] = modulus;
      for (std::size_t a : kids[1]) values[j - 1][a] = -modulus;
    }
  }
}

}  // namespace detail

/// Procedure 1: inside every cell V of D_{m-2}, rescales the tail levels
/// m..n on the child with the smaller common modulus so both children share
/// the larger one. Cells where the smaller modulus is zero are skipped (the
/// scaling factor is undefined); procedure 2 resolves them.
inline std::pair<MDSystem, TransformReport> procedure1(const MDSystem& d, std::size_t m, double p) {
  detail::require_valid(d, "procedure1");
  const std::size_t n = d.levels();
  if (m < 2 || m > n) throw Error(ErrorCode::DomainError, "procedure1 requires 2 <= m <= n");
  if (!(p >= 1)) throw Error(ErrorCode::DomainError, "procedure1 requires p >= 1");
  if (!is_m_rademacher(d, m))
    throw Error(ErrorCode::NotMRademacher, "procedure1 requires an m-Rademacher input at m=" + std::to_string(m));

  std::vector<std::vector<Rational>> values;
  values.reserve(n);
  for (std::size_t j = 1; j <= n; ++j) values.push_back(d.level_values(j));

  TransformReport rep;
  rep.kind = "procedure1";
  rep.level = m;
  rep.p = p;
  rep.before = summarize(d, p);

  for (const auto& [v_id, v_atoms] : d.level_cells(m - 2)) {
    auto kids = detail::two_children(d, v_atoms, m - 1);
    const auto c0 = detail::common_modulus(d, kids[0], m, n);
    const auto c1 = detail::common_modulus(d, kids[1], m, n);
    if (!c0 || !c1)
      throw Error(ErrorCode::NotMRademacher, "tail moduli not constant on cell " + std::to_string(v_id));
    if (*c0 == *c1) continue;
    const bool zero_side = c0->is_zero() || c1->is_zero();
    if (zero_side) {
      rep.notes.push_back("cell " + std::to_string(v_id) + ": zero modulus on one child, skipped");
      continue;
    }
    const bool scale_first = *c0 < *c1;
    const Rational factor = scale_first ? (*c1 / *c0) : (*c0 / *c1);
    const auto& atoms = scale_first ? kids[0] : kids[1];
    for (std::size_t j = m; j <= n; ++j)
      for (std::size_t a : atoms) values[j - 1][a] *= factor;
  }

  std::vector<CellLabeling> partitions;
  partitions.reserve(n);
  for (std::size_t j = 1; j <= n; ++j) partitions.push_back(d.partition(j));
  MDSystem out(d.grid(), std::move(partitions), std::move(values));

  rep.after = summarize(out, p);
  rep.after_valid = rep.after.valid;
  rep.sup_preserved = rep.after.sup_cww_sq == rep.before.sup_cww_sq;
  rep.pnorm_delta = rep.after.pnorm - rep.before.pnorm;
  rep.pnorm_nondecreasing = detail::pnorm_nondecreasing(rep.before, rep.after);
  rep.relation = detail::compare_cww_pointwise(d, out);
  rep.passed = rep.after_valid && rep.sup_preserved && rep.pnorm_nondecreasing;
  return {std::move(out), std::move(rep)};
}

/// Procedure 2: inside every cell V of D_{m-2}, levels m-1..n are rescaled
/// to one common modulus c' with (n-m+2) c'^2 = c_{m-1}^2 + (n-m+1) c_V^2,
/// preserving the sum of squares; c' is stored as a 60-bit rational
/// approximation and the report carries the exact target and error bound.
/// Children left asymmetric by procedure 1 (one side zero) are first filled
/// with fresh +/- patterns at the nonzero side's modulus.
inline std::pair<MDSystem, TransformReport> procedure2(const MDSystem& d, std::size_t m, double p) {
  detail::require_valid(d, "procedure2");
  const std::size_t n = d.levels();
  if (m < 2 || m > n) throw Error(ErrorCode::DomainError, "procedure2 requires 2 <= m <= n");
  if (!(p >= 1)) throw Error(ErrorCode::DomainError, "procedure2 requires p >= 1");
  if (!is_dyadic(d)) throw Error(ErrorCode::NotDyadic, "procedure2 requires a dyadic system");

  std::vector<std::vector<Rational>> values;
  values.reserve(n);
  for (std::size_t j = 1; j <= n; ++j) values.push_back(d.level_values(j));

  TransformReport rep;
  rep.kind = "procedure2";
  rep.level = m;
  rep.p = p;
  rep.before = summarize(d, p);

  const long L = static_cast<long>(n - m + 2);
  Rational max_rel_sq_error(0);

  for (const auto& [v_id, v_atoms] : d.level_cells(m - 2)) {
    const auto head = detail::common_modulus(d, v_atoms, m - 1, m - 1);
    if (!head)
      throw Error(ErrorCode::NotPrepared, "|d_{m-1}| not constant on cell " + std::to_string(v_id));
    auto kids = detail::two_children(d, v_atoms, m - 1);
    const auto c0 = detail::common_modulus(d, kids[0], m, n);
    const auto c1 = detail::common_modulus(d, kids[1], m, n);
    if (!c0 || !c1)
      throw Error(ErrorCode::NotPrepared, "tail moduli not constant per child of cell " + std::to_string(v_id));

    Rational tail = *c0;
    if (*c0 != *c1) {
      if (!c0->is_zero() && !c1->is_zero())
        throw Error(ErrorCode::NotPrepared,
                    "children of cell " + std::to_string(v_id) + " have distinct nonzero moduli; run procedure1");
      tail = std::max(*c0, *c1);
      const auto& zero_atoms = c0->is_zero() ? kids[0] : kids[1];
      detail::fill_sign_patterns(d, values, zero_atoms, m, n, tail);
      rep.notes.push_back("cell " + std::to_string(v_id) + ": filled zero child at modulus " + tail.to_string());
    }

    if (*head == tail) continue;

    const Rational target_sq = (square(*head) + Rational(L - 1) * square(tail)) / Rational(L);
    const Rational cprime = rational_sqrt(target_sq, 60);
    if (!target_sq.is_zero()) {
      const Rational rel = (square(cprime) / target_sq - Rational(1)).abs();
      if (rel > max_rel_sq_error) max_rel_sq_error = rel;
      rep.notes.push_back("cell " + std::to_string(v_id) + ": c'^2 target " + target_sq.to_string() +
                          ", squared approximation off by " + std::to_string(rel.to_double()));
    }

    if (head->is_zero()) {
      detail::fill_sign_patterns(d, values, v_atoms, m - 1, m - 1, cprime);
    } else {
      const Rational factor = cprime / *head;
      for (std::size_t a : v_atoms) values[m - 2][a] *= factor;
    }
    if (tail.is_zero()) {
      detail::fill_sign_patterns(d, values, v_atoms, m, n, cprime);
    } else {
      const Rational factor = cprime / tail;
      for (std::size_t j = m; j <= n; ++j)
        for (std::size_t a : v_atoms) values[j - 1][a] *= factor;
    }
  }

  std::vector<CellLabeling> partitions;
  partitions.reserve(n);
  for (std::size_t j = 1; j <= n; ++j) partitions.push_back(d.partition(j));
  MDSystem out(d.grid(), std::move(partitions), std::move(values));

  rep.after = summarize(out, p);
  rep.after_valid = rep.after.valid;
  rep.cprime_rel_error_bound = max_rel_sq_error.to_double();
  // Sup certificate: exact when no modulus was replaced, else within the
  // declared approximation bound (the criterion pins 2^-50).
  {
    const Rational& sb = rep.before.sup_cww_sq;
    const Rational& sa = rep.after.sup_cww_sq;
    const Rational diff = (sa - sb).abs();
    const Rational allowance = sb * Rational(1, 1125899906842624L);  // 2^-50
    rep.sup_preserved = diff <= allowance;
  }
  rep.output_rademacher_step = is_m_rademacher(out, m - 1);
  rep.pnorm_delta = rep.after.pnorm - rep.before.pnorm;
  rep.pnorm_nondecreasing = detail::pnorm_nondecreasing(rep.before, rep.after);
  rep.relation = detail::compare_cww_pointwise(d, out);
  rep.passed = rep.after_valid && rep.sup_preserved && rep.output_rademacher_step &&
               (!(p >= 3) || rep.pnorm_nondecreasing);
  return {std::move(out), std::move(rep)};
}

/// Chained certificate for the canonicalization pipelines.
struct PipelineReport {
  std::string kind;
  double p = 0;
  std::vector<TransformReport> steps;
  double u_before = 0;
  double u_after = 0;
  bool u_nondecreasing = false;  // within 1e-9 relative
  bool passed = false;
};

/// Full T1 pipeline: R1 then R2 for k = 1..n. Output is dyadic and the
/// ratio U never drops by more than 1e-9 relative.
inline std::pair<MDSystem, PipelineReport> dyadize(const MDSystem& d, double p) {
  detail::require_valid(d, "dyadize");
  if (d.is_trivial()) throw Error(ErrorCode::TrivialSystem, "dyadize requires a non-trivial system");
  if (!(p > 2)) throw Error(ErrorCode::DomainError, "dyadize requires p > 2");

  PipelineReport rep;
  rep.kind = "dyadize";
  rep.p = p;
  rep.u_before = u_ratio(d, p).ratio;

  MDSystem current = d;
  bool steps_ok = true;
  for (std::size_t k = 1; k <= d.levels(); ++k) {
    auto [after_r1, rep1] = r1_transform(current, k, p);
    steps_ok = steps_ok && rep1.passed;
    rep.steps.push_back(std::move(rep1));
    auto [after_r2, rep2] = r2_transform(after_r1, k, p);
    steps_ok = steps_ok && rep2.passed;
    rep.steps.push_back(std::move(rep2));
    current = std::move(after_r2);
  }

  rep.u_after = u_ratio(current, p).ratio;
  rep.u_nondecreasing = rep.u_after - rep.u_before >= -1e-9 * std::max(1.0, rep.u_before);
  rep.passed = steps_ok && rep.u_nondecreasing && is_dyadic(current);
  return {std::move(current), std::move(rep)};
}

/// Full T2 pipeline: procedures 1 and 2 for m = n..2, turning a dyadic
/// system into a 1-Rademacher one without lowering U. Requires p >= 3 (the
/// equal-coefficient maximality backing procedure 2 holds there).
inline std::pair<MDSystem, PipelineReport> rademacherize(const MDSystem& d, double p) {
  detail::require_valid(d, "rademacherize");
  if (d.is_trivial()) throw Error(ErrorCode::TrivialSystem, "rademacherize requires a non-trivial system");
  if (!is_dyadic(d)) throw Error(ErrorCode::NotDyadic, "rademacherize requires a dyadic input");
  if (!(p >= 3)) throw Error(ErrorCode::DomainError, "rademacherize requires p >= 3");

  PipelineReport rep;
  rep.kind = "rademacherize";
  rep.p = p;
  rep.u_before = u_ratio(d, p).ratio;

  MDSystem current = d;
  bool steps_ok = true;
  for (std::size_t m = d.levels(); m >= 2; --m) {
    auto [after_p1, rep1] = procedure1(current, m, p);
    steps_ok = steps_ok && rep1.passed;
    rep.steps.push_back(std::move(rep1));
    auto [after_p2, rep2] = procedure2(after_p1, m, p);
    steps_ok = steps_ok && rep2.passed;
    rep.steps.push_back(std::move(rep2));
    current = std::move(after_p2);
  }

  rep.u_after = u_ratio(current, p).ratio;
  rep.u_nondecreasing = rep.u_after - rep.u_before >= -1e-9 * std::max(1.0, rep.u_before);
  rep.passed = steps_ok && rep.u_nondecreasing && is_m_rademacher(current, 1);
  return {std::move(current), std::move(rep)};
}

}  // namespace khintmart
