#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "khintmart/md_system.hpp"
#include "khintmart/step_function.hpp"

namespace khintmart {

/// A square function held in squared form, so comparisons and transform
/// certificates are exact rational arithmetic. Square roots happen only at
/// reporting boundaries.
struct SquareFunctionResult {
  StepFunction pointwise_sq;  // square of the square function, per atom
  Rational sup_sq;            // = max of pointwise_sq

  double sup() const { return std::sqrt(sup_sq.to_double()); }
};

/// Envelope process D_k: on each cell V of D_{k-1}, the constant
/// sup of |d_k| over V.
inline StepFunction envelope(const MDSystem& d, std::size_t k) {
  if (k < 1 || k > d.levels()) throw Error(ErrorCode::DomainError, "level out of range");
  std::map<std::uint32_t, Rational> cell_sup;
  for (std::size_t a = 0; a < d.atom_count(); ++a) {
    const Rational m = d.value(k, a).abs();
    auto [it, inserted] = cell_sup.emplace(d.label(k - 1, a), m);
    if (!inserted && m > it->second) it->second = m;
  }
  std::vector<Rational> vals(d.atom_count());
  for (std::size_t a = 0; a < d.atom_count(); ++a) vals[a] = cell_sup[d.label(k - 1, a)];
  return StepFunction(d.grid(), std::move(vals));
}

/// Chang-Wilson-Wolff square function, squared: sum over levels of D_k^2.
inline SquareFunctionResult square_cww(const MDSystem& d) {
  std::vector<Rational> acc(d.atom_count(), Rational(0));
  for (std::size_t k = 1; k <= d.levels(); ++k) {
    const StepFunction env = envelope(d, k);
    for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += square(env.value(a));
  }
  Rational sup(0);
  for (const auto& v : acc)
    if (v > sup) sup = v;
  return {StepFunction(d.grid(), std::move(acc)), sup};
}

/// Classical square function, squared: sum over levels of d_k^2 pointwise.
inline SquareFunctionResult square_classical(const MDSystem& d) {
  std::vector<Rational> acc(d.atom_count(), Rational(0));
  for (std::size_t k = 1; k <= d.levels(); ++k)
    for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += square(d.value(k, a));
  Rational sup(0);
  for (const auto& v : acc)
    if (v > sup) sup = v;
  return {StepFunction(d.grid(), std::move(acc)), sup};
}

/// Largest alpha such that every child has measure >= alpha times its
/// parent's, i.e. the minimum child/parent measure ratio over all levels.
inline Rational homogeneity(const MDSystem& d) {
  Rational best(1);
  for (std::size_t j = 0; j < d.levels(); ++j) {
    std::map<std::uint32_t, Rational> parent_measure;
    std::map<std::uint32_t, Rational> child_measure;
    std::map<std::uint32_t, std::uint32_t> parent_of;
    for (std::size_t a = 0; a < d.atom_count(); ++a) {
      parent_measure[d.label(j, a)] += d.grid()->measure(a);
      child_measure[d.label(j + 1, a)] += d.grid()->measure(a);
      parent_of[d.label(j + 1, a)] = d.label(j, a);
    }
    for (const auto& [child, measure] : child_measure) {
      const Rational ratio = measure / parent_measure[parent_of[child]];
      if (ratio < best) best = ratio;
    }
  }
  return best;
}

}  // namespace khintmart
