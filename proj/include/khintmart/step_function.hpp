#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "khintmart/grid.hpp"
#include "khintmart/rational.hpp"

namespace khintmart {

/// Value-per-atom function on [0,1). Defined everywhere; exact rational
/// values. All martingale differences and partial sums live here.
class StepFunction {
 public:
  StepFunction(GridPtr grid, std::vector<Rational> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->atom_count())
      throw Error(ErrorCode::DomainError, "value count does not match atom count");
  }

  const GridPtr& grid() const { return grid_; }
  std::size_t atom_count() const { return values_.size(); }
  const Rational& value(std::size_t atom) const { return values_.at(atom); }
  const std::vector<Rational>& values() const { return values_; }

  Rational sup_norm() const {
    Rational best(0);
    for (const auto& v : values_) {
      Rational a = v.abs();
      if (a > best) best = a;
    }
    return best;
  }

  bool is_zero() const {
    for (const auto& v : values_)
      if (!v.is_zero()) return false;
    return true;
  }

 private:
  GridPtr grid_;
  std::vector<Rational> values_;
};

/// Exact Lebesgue integral: sum of value * atom measure.
inline Rational integrate(const StepFunction& f) {
  Rational total(0);
  for (std::size_t a = 0; a < f.atom_count(); ++a) total += f.value(a) * f.grid()->measure(a);
  return total;
}

namespace detail {

/// Neumaier compensated summation; keeps long accumulations near 1 ulp.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

/// Integral of |f|^p, evaluated in floating point from the exact rationals.
/// Returns the p-th power of the norm; callers take the root.
inline double integrate_abs_pow(const StepFunction& f, double p) {
  if (!(p > 0)) throw Error(ErrorCode::DomainError, "integrate_abs_pow requires p > 0");
  detail::KahanSum acc;
  for (std::size_t a = 0; a < f.atom_count(); ++a) {
    const double v = std::fabs(f.value(a).to_double());
    if (v == 0.0) continue;
    acc.add(std::pow(v, p) * f.grid()->measure(a).to_double());
  }
  return acc.value();
}

}  // namespace khintmart
