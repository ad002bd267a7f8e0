#pragma once

#include <cmath>
#include <cstddef>

#include "khintmart/errors.hpp"

namespace khintmart {

/// log Gamma via the Lanczos approximation (g = 7, 9 terms), accurate to a
/// few ulps across [0.5, 200]; half-integer closed forms serve as oracles in
/// the tests. Arguments below 0.5 are lifted with the recurrence
/// Gamma(x) = Gamma(x+1)/x.
inline double log_gamma(double x) {
  if (!(x > 0)) throw Error(ErrorCode::DomainError, "log_gamma requires x > 0");
  static constexpr long double kCoeff[9] = {
      0.99999999999980993L,      676.5203681218851L,     -1259.1392167224028L,
      771.32342877765313L,       -176.61502916214059L,   12.507343278686905L,
      -0.13857109526572012L,     9.9843695780195716e-6L, 1.5056327351493116e-7L,
  };
  long double shift = 0.0L;
  long double z = x;
  while (z < 0.5L) {
    shift -= std::log(static_cast<double>(z));
    z += 1.0L;
  }
  long double acc = kCoeff[0];
  for (int i = 1; i < 9; ++i) acc += kCoeff[i] / (z - 1.0L + static_cast<long double>(i));
  const long double t = z + 6.5L;
  const long double half_log_two_pi = 0.91893853320467274178032973640562L;
  const long double lg = half_log_two_pi + (z - 0.5L) * std::log(static_cast<double>(t)) - t +
                         std::log(static_cast<double>(acc));
  return static_cast<double>(lg + shift);
}

/// Sharp Khintchine constant for Rademacher sums,
/// 2^(1/2) * (Gamma((p+1)/2)/sqrt(pi))^(1/p), valid for p > 2.
inline double khintchine_constant(double p) {
  if (!(p > 2)) throw Error(ErrorCode::DomainError, "khintchine_constant requires p > 2");
  const double half_log_pi = 0.5 * std::log(std::acos(-1.0));
  return std::sqrt(2.0) * std::exp((log_gamma((p + 1) / 2) - half_log_pi) / p);
}

/// || (1/sqrt(n)) sum r_k ||_p by exact binomial enumeration:
/// ( 2^-n * sum_j C(n,j) |n-2j|^p / n^(p/2) )^(1/p).
/// Evaluated in long double; binomial weights by multiplicative recurrence,
/// so no overflow up to n in the thousands.
inline double rademacher_pnorm(std::size_t n, double p) {
  if (n < 1) throw Error(ErrorCode::DomainError, "rademacher_pnorm requires n >= 1");
  if (!(p > 0)) throw Error(ErrorCode::DomainError, "rademacher_pnorm requires p > 0");
  long double weight = std::pow(0.5L, static_cast<long double>(n));  // C(n,0)/2^n
  long double sum = 0.0L;
  long double comp = 0.0L;
  for (std::size_t j = 0; j <= n; ++j) {
    const long double centered = std::fabs(static_cast<long double>(n) - 2.0L * static_cast<long double>(j));
    if (centered != 0.0L) {
      const long double term = weight * std::pow(centered, static_cast<long double>(p));
      const long double t = sum + term;
      comp += (std::fabs(sum) >= std::fabs(term)) ? (sum - t) + term : (term - t) + sum;
      sum = t;
    }
    if (j < n) weight = weight * static_cast<long double>(n - j) / static_cast<long double>(j + 1);
  }
  const long double moment = (sum + comp) / std::pow(static_cast<long double>(n), static_cast<long double>(p) / 2.0L);
  return static_cast<double>(std::pow(moment, 1.0L / static_cast<long double>(p)));
}

}  // namespace khintmart
