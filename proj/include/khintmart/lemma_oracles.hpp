#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "khintmart/rng.hpp"
#include "khintmart/step_function.hpp"

namespace khintmart {

/// Grid evidence for a claimed monotone function. worst_violation is the
/// largest relative drop between consecutive grid values (0 when monotone).
struct MonotoneCheck {
  std::vector<double> grid;
  std::vector<double> values;
  bool monotone = false;
  double worst_violation = 0;

  static MonotoneCheck of(std::vector<double> grid, std::vector<double> values, double tolerance = 1e-12) {
    MonotoneCheck c;
    c.grid = std::move(grid);
    c.values = std::move(values);
    for (std::size_t i = 0; i + 1 < c.values.size(); ++i) {
      const double scale = std::max({1.0, std::fabs(c.values[i]), std::fabs(c.values[i + 1])});
      const double drop = (c.values[i] - c.values[i + 1]) / scale;
      if (drop > c.worst_violation) c.worst_violation = drop;
    }
    c.monotone = c.worst_violation <= tolerance;
    return c;
  }
};

inline double sign_of(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

namespace detail {

inline double lemma_u_raw(double t, double xi, double p) {
  const double a = std::pow(std::fabs(t + xi), p - 1) * sign_of(t + xi);
  const double b = std::pow(std::fabs(t - xi), p - 1) * sign_of(t - xi);
  return (a + b) / t;
}

}  // namespace detail

/// u(t) = (|t+xi|^(p-1) sign(t+xi) + |t-xi|^(p-1) sign(t-xi)) / t,
/// increasing over t > 0 when p > 3.
inline double lemma_u(double t, double xi, double p) {
  if (!(t > 0) || !(xi > 0) || !(p > 3)) throw Error(ErrorCode::DomainError, "lemma_u requires t>0, xi>0, p>3");
  return detail::lemma_u_raw(t, xi, p);
}

/// Monotonicity evidence for lemma_u. Exponents 1 < p <= 3 are accepted as
/// out-of-hypothesis probes: the check runs and reports, callers must not
/// assert monotonicity there.
inline MonotoneCheck check_L3(double xi, double p, const std::vector<double>& t_grid) {
  if (!(xi > 0) || !(p > 1)) throw Error(ErrorCode::DomainError, "check_L3 requires xi > 0 and p > 1");
  std::vector<double> vals;
  vals.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t > 0)) throw Error(ErrorCode::DomainError, "check_L3 grid must be positive");
    vals.push_back(detail::lemma_u_raw(t, xi, p));
  }
  return MonotoneCheck::of(t_grid, std::move(vals));
}

/// |x+y+xi|^p + |x+y-xi|^p + |y-x+xi|^p + |y-x-xi|^p.
inline double lemma_sum(double x, double y, double xi, double p) {
  return std::pow(std::fabs(x + y + xi), p) + std::pow(std::fabs(x + y - xi), p) +
         std::pow(std::fabs(y - x + xi), p) + std::pow(std::fabs(y - x - xi), p);
}

struct ArgmaxCheck {
  std::size_t argmax_index = 0;
  std::size_t grid_size = 0;
  bool argmax_at_balance = false;  // maximum attained at x = r/sqrt(2)
  MonotoneCheck increase_toward_balance;
};

/// Maximizes the lemma_sum over the circle x^2 + y^2 = r^2 with
/// 0 < x <= r/sqrt(2) <= y; the claim is a maximum exactly at balance.
inline ArgmaxCheck check_L4(double xi, double p, double r, std::size_t grid_size) {
  if (!(r > 0) || grid_size < 2) throw Error(ErrorCode::DomainError, "check_L4 requires r > 0 and a real grid");
  const double x_max = r / std::sqrt(2.0);
  std::vector<double> grid, vals;
  grid.reserve(grid_size);
  vals.reserve(grid_size);
  for (std::size_t i = 1; i <= grid_size; ++i) {
    const double x = x_max * static_cast<double>(i) / static_cast<double>(grid_size);
    const double y = std::sqrt(std::max(0.0, r * r - x * x));
    grid.push_back(x);
    vals.push_back(lemma_sum(x, y, xi, p));
  }
  ArgmaxCheck out;
  out.grid_size = grid_size;
  for (std::size_t i = 1; i < vals.size(); ++i)
    if (vals[i] > vals[out.argmax_index]) out.argmax_index = i;
  out.argmax_at_balance = out.argmax_index + 1 == vals.size();
  out.increase_toward_balance = MonotoneCheck::of(std::move(grid), std::move(vals));
  return out;
}

/// ||xi + sum a_k r_k||_p by full sign enumeration, 2^n terms.
inline double rademacher_shifted_pnorm(double xi, const std::vector<double>& coeffs, double p) {
  const std::size_t n = coeffs.size();
  if (n > 24) throw Error(ErrorCode::SizeLimit, "sign enumeration capped at n = 24");
  detail::KahanSum acc;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double s = xi;
    for (std::size_t k = 0; k < n; ++k) s += (mask >> k) & 1u ? -coeffs[k] : coeffs[k];
    acc.add(std::pow(std::fabs(s), p));
  }
  return std::pow(acc.value() / static_cast<double>(total), 1.0 / p);
}

struct L6Check {
  double equal_coefficient_value = 0;
  double best_trial_value = 0;
  std::size_t trials = 0;
  std::size_t violations = 0;  // trials beating the equal-coefficient value
  bool holds = false;
};

/// Random-direction evidence for the equal-coefficient maximality of
/// ||xi + sum a_k r_k||_p over the sphere sum a_k^2 = r^2.
inline L6Check check_L6(std::size_t n, double r, double xi, double p, std::size_t trials, std::uint64_t seed,
                        double tolerance = 1e-12) {
  if (n < 1) throw Error(ErrorCode::DomainError, "check_L6 requires n >= 1");
  L6Check out;
  out.trials = trials;
  std::vector<double> equal(n, r / std::sqrt(static_cast<double>(n)));
  out.equal_coefficient_value = rademacher_shifted_pnorm(xi, equal, p);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto rng = make_trial_rng(seed, trial);
    std::vector<double> a(n);
    double norm_sq = 0;
    for (double& x : a) {
      // Box-Muller from explicit uniforms keeps the stream reproducible.
      const double u1 = std::max(draw_unit(rng), 1e-300);
      const double u2 = draw_unit(rng);
      x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::acos(-1.0) * u2);
      norm_sq += x * x;
    }
    if (norm_sq == 0) continue;
    for (double& x : a) x *= r / std::sqrt(norm_sq);
    const double value = rademacher_shifted_pnorm(xi, a, p);
    if (value > out.best_trial_value) out.best_trial_value = value;
    if (value > out.equal_coefficient_value + tolerance) ++out.violations;
  }
  out.holds = out.violations == 0;
  return out;
}

/// h(x) = integral of |xi + x g(t)|^p dt for a mean-zero step function g;
/// increasing over (0, infinity).
inline MonotoneCheck check_L8(const StepFunction& g, double xi, double p, const std::vector<double>& x_grid) {
  if (g.is_zero()) throw Error(ErrorCode::DomainError, "check_L8 requires a non-trivial g");
  if (!integrate(g).is_zero()) throw Error(ErrorCode::NotMeanZero, "check_L8 requires integral(g) = 0");
  if (!(p >= 1)) throw Error(ErrorCode::DomainError, "check_L8 requires p >= 1");
  std::vector<double> vals;
  vals.reserve(x_grid.size());
  for (double x : x_grid) {
    detail::KahanSum acc;
    for (std::size_t a = 0; a < g.atom_count(); ++a)
      acc.add(std::pow(std::fabs(xi + x * g.value(a).to_double()), p) * g.grid()->measure(a).to_double());
    vals.push_back(acc.value());
  }
  return MonotoneCheck::of(x_grid, std::move(vals));
}

/// Enumeration oracle for the closed-form Rademacher norm: all 2^n sign
/// vectors of (1/sqrt n) sum r_k.
inline double brute_rademacher_pnorm(std::size_t n, double p) {
  if (n < 1) throw Error(ErrorCode::DomainError, "brute_rademacher_pnorm requires n >= 1");
  if (n > 20) throw Error(ErrorCode::SizeLimit, "brute_rademacher_pnorm capped at n = 20");
  long double sum = 0.0L, comp = 0.0L;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const long double s = static_cast<long double>(n) - 2.0L * static_cast<long double>(__builtin_popcountll(mask));
    if (s == 0.0L) continue;
    const long double term = std::pow(std::fabs(s), static_cast<long double>(p));
    const long double t = sum + term;
    comp += (std::fabs(sum) >= std::fabs(term)) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  const long double moment = (sum + comp) / static_cast<long double>(total) /
                             std::pow(static_cast<long double>(n), static_cast<long double>(p) / 2.0L);
  return static_cast<double>(std::pow(moment, 1.0L / static_cast<long double>(p)));
}

}  // namespace khintmart
