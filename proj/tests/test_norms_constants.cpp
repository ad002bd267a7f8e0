#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "khintmart/constants.hpp"
#include "khintmart/generators.hpp"
#include "khintmart/lemma_oracles.hpp"
#include "khintmart/norms.hpp"

using namespace khintmart;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a khintmart::Error");
  return ErrorCode::DomainError;
}

MDSystem thirds_system() {
  return MDSystem(make_grid({Rational(0), Rational(1, 3), Rational(2, 3), Rational(1)}),
                  {CellLabeling{{0, 1, 2}}}, {{Rational(2), Rational(-1), Rational(-1)}});
}

MDSystem scaled_rademacher(std::size_t n, unsigned bits = 60) {
  // d_k = r_k / sqrt(n) with the coefficient injected as a rational
  // approximation of declared precision.
  const Rational inv_sqrt_n = Rational(1) / rational_sqrt(Rational(static_cast<long>(n)), bits);
  return from_rademacher_coeffs(std::vector<Rational>(n, inv_sqrt_n));
}

}  // namespace

TEST_CASE("pnorm_sum matches enumerations") {
  CHECK(pnorm_sum(from_haar_coeffs({Rational(0), Rational(1)}), 2.5) == Catch::Approx(1.0));
  // a = (1,1): sum takes values {2,0,0,-2}, fourth moment 8.
  CHECK(pnorm_sum(from_rademacher_coeffs({Rational(1), Rational(1)}), 4) ==
        Catch::Approx(std::pow(8.0, 0.25)).epsilon(1e-13));
  CHECK(pnorm_sum(thirds_system(), 3) == Catch::Approx(std::pow(10.0 / 3.0, 1.0 / 3.0)).epsilon(1e-13));
}

TEST_CASE("u_ratio") {
  CHECK(u_ratio(from_haar_coeffs({Rational(0), Rational(5)}), 3.5).ratio == Catch::Approx(1.0));
  CHECK(u_ratio(from_rademacher_coeffs({Rational(1), Rational(1)}), 4).ratio ==
        Catch::Approx(std::pow(2.0, 0.25)).epsilon(1e-13));
  CHECK(u_ratio(thirds_system(), 3).ratio ==
        Catch::Approx(std::pow(10.0 / 3.0, 1.0 / 3.0) / 2.0).epsilon(1e-13));
  const RatioResult r = u_ratio(thirds_system(), 3);
  CHECK(r.ratio * r.sup_cww == Catch::Approx(r.pnorm).epsilon(1e-12));
  CHECK(code_of([] { u_ratio(from_haar_coeffs({Rational(0), Rational(0)}), 3); }) == ErrorCode::TrivialSystem);
}

TEST_CASE("rademacher_pnorm closed forms and oracle agreement") {
  for (double p : {1.0, 2.5, 3.0, 4.0, 7.0}) CHECK(rademacher_pnorm(1, p) == Catch::Approx(1.0));

  // The two p = 2.5 values behind the non-monotonicity counterexample.
  const double p = 2.5;
  CHECK(std::pow(rademacher_pnorm(2, p), p) == Catch::Approx(std::pow(2.0, p / 2) / 2).epsilon(1e-13));
  CHECK(std::pow(rademacher_pnorm(3, p), p) ==
        Catch::Approx(std::pow(3.0, p / 2) / 4 + 3.0 / (4 * std::pow(3.0, p / 2))).epsilon(1e-13));
  CHECK(rademacher_pnorm(2, p) > rademacher_pnorm(3, p));

  for (std::size_t n = 1; n <= 12; ++n)
    for (double q : {2.5, 3.0, 4.0, 6.0})
      CHECK(rademacher_pnorm(n, q) == Catch::Approx(brute_rademacher_pnorm(n, q)).epsilon(1e-13));

  // Increasing in n when p >= 3.
  for (double q : {3.0, 4.0}) {
    double prev = 0;
    for (std::size_t n = 1; n <= 30; ++n) {
      const double value = rademacher_pnorm(n, q);
      CHECK(value >= prev - 1e-12);
      prev = value;
    }
  }
}

TEST_CASE("khintchine_constant closed forms") {
  CHECK(khintchine_constant(4) == Catch::Approx(std::pow(3.0, 0.25)).epsilon(1e-13));
  CHECK(khintchine_constant(3) ==
        Catch::Approx(std::sqrt(2.0) * std::pow(std::acos(-1.0), -1.0 / 6.0)).epsilon(1e-13));
  CHECK(code_of([] { khintchine_constant(2.0); }) == ErrorCode::DomainError);
  // Upper envelope of the fixed-n constants for p slightly above 2.
  for (double p : {2.1, 2.5, 2.9})
    for (std::size_t n : {1, 2, 5, 20, 100})
      CHECK(rademacher_pnorm(n, p) <= khintchine_constant(p) + 1e-12);
}

TEST_CASE("log_gamma against closed forms and the C library") {
  CHECK(std::fabs(log_gamma(1.0)) < 1e-14);
  CHECK(std::fabs(log_gamma(2.0)) < 1e-14);
  CHECK(log_gamma(2.5) == Catch::Approx(std::log(3.0 * std::sqrt(std::acos(-1.0)) / 4.0)).epsilon(1e-14));
  CHECK(log_gamma(10.0) == Catch::Approx(std::log(362880.0)).epsilon(1e-14));
  CHECK(code_of([] { log_gamma(0.0); }) == ErrorCode::DomainError);
  for (double x = 0.5; x <= 200.0; x += 0.25) {
    const double mine = log_gamma(x);
    const double libm = std::lgamma(x);
    CHECK(std::fabs(mine - libm) <= 1e-13 * std::max(1.0, std::fabs(libm)));
  }
}

TEST_CASE("mgf_ratio point values and domain") {
  MDSystem single = from_rademacher_coeffs({Rational(1)});
  const BoundCheck at04 = mgf_ratio(single, 0.4);
  CHECK(at04.lhs == Catch::Approx(std::exp(0.4)).epsilon(1e-13));
  CHECK(at04.rhs == Catch::Approx(1.0 / std::sqrt(0.2)).epsilon(1e-13));
  CHECK(at04.holds);

  const BoundCheck tiny = mgf_ratio(single, 1e-9);
  CHECK(tiny.lhs == Catch::Approx(1.0));
  CHECK(tiny.rhs == Catch::Approx(1.0));

  // n = 2 scaled: enumerate the four outcomes directly.
  MDSystem two = scaled_rademacher(2);
  const BoundCheck c = mgf_ratio(two, 0.45);
  const double enumerated = 0.25 * (std::exp(0.45 * 2.0) + std::exp(0.0) + std::exp(0.0) + std::exp(0.45 * 2.0));
  CHECK(c.lhs == Catch::Approx(enumerated).epsilon(1e-9));
  CHECK(c.holds);

  CHECK(code_of([&] { mgf_ratio(single, 0.5); }) == ErrorCode::DomainError);
  CHECK(code_of([] { mgf_ratio(from_haar_coeffs({Rational(0), Rational(0)}), 0.1); }) ==
        ErrorCode::TrivialSystem);
}

TEST_CASE("luxemburg_norm bisection against the closed form") {
  // Single Rademacher: E[exp(1/u^2) - 1] = 1 at u = 1/sqrt(ln 2).
  const BoundCheck single = luxemburg_norm(from_rademacher_coeffs({Rational(1)}));
  CHECK(single.lhs == Catch::Approx(1.0 / std::sqrt(std::log(2.0))).epsilon(1e-10));
  CHECK(single.rhs == Catch::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-13));
  CHECK(single.holds);

  // Two scaled levels: the sum is +/-2q or 0 with weights 1/4, 1/2, so
  // E[psi(f/u)] = (exp((2q/u)^2) - 1)/2 and the norm is 2q / sqrt(ln 3).
  MDSystem two = scaled_rademacher(2);
  const double q = two.value(1, 0).to_double();
  const BoundCheck pair = luxemburg_norm(two);
  CHECK(pair.lhs == Catch::Approx(2.0 * q / std::sqrt(std::log(3.0))).epsilon(1e-10));
  CHECK(pair.holds);

  CHECK(code_of([] { luxemburg_norm(from_haar_coeffs({Rational(0), Rational(0)})); }) ==
        ErrorCode::TrivialSystem);
}

TEST_CASE("tail_check exact left sides") {
  MDSystem single = from_haar_coeffs({Rational(0), Rational(1)});
  const BoundCheck c = tail_check(single, 0.5, TailMode::cww);
  CHECK(c.lhs == 0.5);  // exact: mu{h_2 > 1/2} = 1/2
  CHECK(c.rhs == Catch::Approx(std::exp(-0.125)).epsilon(1e-13));
  CHECK(c.holds);
  CHECK(tail_check(single, 2.0, TailMode::cww).lhs == 0.0);

  const BoundCheck h = tail_check(thirds_system(), 1.0, TailMode::homogeneous);
  CHECK(h.lhs == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(h.rhs == Catch::Approx(std::exp(-(1.0 / 3.0) * 1.0 / 4.0)).epsilon(1e-13));
  CHECK(h.holds);
}

TEST_CASE("verify_khintchine equality witness and random systems") {
  // d_k = r_k / sqrt(n): equality by scale invariance.
  const KhintchineCheck eq = verify_khintchine(scaled_rademacher(3), 3);
  CHECK(eq.sharp.lhs == Catch::Approx(eq.sharp.rhs).epsilon(1e-12));
  CHECK(eq.sharp.holds);
  CHECK(eq.asymptotic.holds);

  const KhintchineCheck single = verify_khintchine(from_haar_coeffs({Rational(0), Rational(1)}), 5);
  CHECK(single.sharp.lhs == Catch::Approx(1.0));
  CHECK(single.sharp.rhs == Catch::Approx(1.0));

  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    MDSystem d = random_md(1 + seed % 4, 3, 5, seed);
    CHECK(verify_khintchine(d, 4).sharp.holds);
    CHECK(verify_khintchine(d, 4).asymptotic.holds);
  }

  CHECK(code_of([] { verify_khintchine(from_haar_coeffs({Rational(0), Rational(1)}), 2.5); }) ==
        ErrorCode::DomainError);
}

TEST_CASE("sub-Gaussian bounds hold across random systems") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    MDSystem d = random_md(1 + seed % 5, 4, 8, seed);
    for (double lambda = 0.05; lambda < 0.46; lambda += 0.05) CHECK(mgf_ratio(d, lambda).holds);
    CHECK(luxemburg_norm(d).holds);
    for (double lambda : {0.1, 0.7, 1.5, 3.0}) {
      CHECK(tail_check(d, lambda, TailMode::cww).holds);
      CHECK(tail_check(d, lambda, TailMode::homogeneous).holds);
    }
  }
}
