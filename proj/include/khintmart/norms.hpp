#pragma once

#include <cmath>
#include <cstddef>

#include "khintmart/constants.hpp"
#include "khintmart/md_system.hpp"
#include "khintmart/square_functions.hpp"
#include "khintmart/step_function.hpp"

namespace khintmart {

struct RatioResult {
  double pnorm;
  double sup_cww;
  double ratio;  // pnorm / sup_cww
};

struct BoundCheck {
  double lhs = 0;
  double rhs = 0;
  bool holds = false;  // lhs <= rhs + tolerance
  double slack = 0;    // rhs - lhs

  static BoundCheck of(double lhs, double rhs, double tolerance) {
    return {lhs, rhs, lhs <= rhs + tolerance, rhs - lhs};
  }
};

namespace detail {

inline void require_nontrivial(const MDSystem& d) {
  if (d.is_trivial()) throw Error(ErrorCode::TrivialSystem, "operation undefined for the all-zero system");
}

}  // namespace detail

/// || d_1 + ... + d_n ||_p with the inner sum exact.
inline double pnorm_sum(const MDSystem& d, double p) {
  if (!(p >= 1)) throw Error(ErrorCode::DomainError, "pnorm_sum requires p >= 1");
  return std::pow(integrate_abs_pow(d.total_sum(), p), 1.0 / p);
}

/// U(d) = ||sum d_k||_p / ||S(d)||_inf, the ratio whose supremum defines
/// the sharp constant.
inline RatioResult u_ratio(const MDSystem& d, double p) {
  detail::require_nontrivial(d);
  const double pnorm = pnorm_sum(d, p);
  const double sup = square_cww(d).sup();
  return {pnorm, sup, pnorm / sup};
}

/// Sub-Gaussian moment bound: E[exp(lambda (sum d_k / ||S(d)||_inf)^2)]
/// against (1-2 lambda)^(-1/2), for 0 < lambda < 1/2.
inline BoundCheck mgf_ratio(const MDSystem& d, double lambda, double tolerance = 1e-9) {
  detail::require_nontrivial(d);
  if (!(lambda > 0 && lambda < 0.5)) throw Error(ErrorCode::DomainError, "mgf_ratio requires 0 < lambda < 1/2");
  const double sup = square_cww(d).sup();
  const StepFunction f = d.total_sum();
  detail::KahanSum acc;
  for (std::size_t a = 0; a < f.atom_count(); ++a) {
    const double r = f.value(a).to_double() / sup;
    acc.add(std::exp(lambda * r * r) * f.grid()->measure(a).to_double());
  }
  return BoundCheck::of(acc.value(), 1.0 / std::sqrt(1.0 - 2.0 * lambda), tolerance);
}

namespace detail {

/// E[psi(f/u)] for psi(t) = exp(t^2) - 1; decreasing in u.
inline double orlicz_mean(const StepFunction& f, double u) {
  KahanSum acc;
  for (std::size_t a = 0; a < f.atom_count(); ++a) {
    const double r = f.value(a).to_double() / u;
    acc.add(std::expm1(r * r) * f.grid()->measure(a).to_double());
  }
  return acc.value();
}

}  // namespace detail

/// Luxemburg norm of sum d_k for psi(t) = exp(t^2) - 1, by monotone
/// bisection, checked against the sharp ceiling sqrt(8/3) ||S(d)||_inf.
inline BoundCheck luxemburg_norm(const MDSystem& d, double tolerance = 1e-9) {
  detail::require_nontrivial(d);
  const double sup = square_cww(d).sup();
  const StepFunction f = d.total_sum();
  double lo = 1e-6 * sup;
  double hi = 10.0 * sup;
  int guard = 0;
  while (detail::orlicz_mean(f, hi) > 1.0 && guard++ < 64) hi *= 2.0;
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * sup; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (detail::orlicz_mean(f, mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return BoundCheck::of(hi, std::sqrt(8.0 / 3.0) * sup, tolerance);
}

enum class TailMode { cww, homogeneous };

/// Tail bound check: exact rational probability of {sum d_k > lambda} on the
/// left, sub-Gaussian right side per mode. The homogeneous mode uses the
/// classical square function and the filtration's homogeneity constant
/// (clamped to 1/2, the largest value the bound is stated for).
inline BoundCheck tail_check(const MDSystem& d, double lambda, TailMode mode, double tolerance = 1e-9) {
  detail::require_nontrivial(d);
  if (!(lambda > 0)) throw Error(ErrorCode::DomainError, "tail_check requires lambda > 0");
  const Rational threshold = Rational::from_double(lambda);
  const StepFunction f = d.total_sum();
  Rational prob(0);
  for (std::size_t a = 0; a < f.atom_count(); ++a)
    if (f.value(a) > threshold) prob += f.grid()->measure(a);

  double rhs;
  if (mode == TailMode::cww) {
    const double sup_sq = square_cww(d).sup_sq.to_double();
    rhs = std::exp(-lambda * lambda / (2.0 * sup_sq));
  } else {
    Rational alpha = homogeneity(d);
    if (alpha > Rational(1, 2)) alpha = Rational(1, 2);
    const double sup_sq = square_classical(d).sup_sq.to_double();
    rhs = std::exp(-alpha.to_double() * lambda * lambda / sup_sq);
  }
  return BoundCheck::of(prob.to_double(), rhs, tolerance);
}

struct KhintchineCheck {
  BoundCheck sharp;       // against ||(1/sqrt n) sum r_k||_p * ||S(d)||_inf
  BoundCheck asymptotic;  // against the p > 2 closed-form constant
};

/// Khintchine-type inequality check at fixed n (sharp form) plus the weaker
/// n-free bound. Requires p >= 3, where the sharp constant is known.
inline KhintchineCheck verify_khintchine(const MDSystem& d, double p, double tolerance = 1e-9) {
  detail::require_nontrivial(d);
  if (!(p >= 3)) throw Error(ErrorCode::DomainError, "verify_khintchine requires p >= 3");
  const double lhs = pnorm_sum(d, p);
  const double sup = square_cww(d).sup();
  return {BoundCheck::of(lhs, rademacher_pnorm(d.levels(), p) * sup, tolerance),
          BoundCheck::of(lhs, khintchine_constant(p) * sup, tolerance)};
}

}  // namespace khintmart
