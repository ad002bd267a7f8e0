#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "khintmart/constants.hpp"
#include "khintmart/lemma_oracles.hpp"

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

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return grid;
}

}  // namespace

TEST_CASE("lemma_u point values") {
  // xi = 1, p = 4: (|t+1|^3 + sign(t-1)|t-1|^3)/t.
  CHECK(lemma_u(1.0, 1.0, 4.0) == Catch::Approx(8.0));
  CHECK(lemma_u(2.0, 1.0, 4.0) == Catch::Approx(14.0));
  CHECK(lemma_u(10.0, 1.0, 4.0) == Catch::Approx(206.0));
  CHECK(code_of([] { lemma_u(1.0, 1.0, 2.5); }) == ErrorCode::DomainError);
  CHECK(code_of([] { lemma_u(-1.0, 1.0, 4.0); }) == ErrorCode::DomainError);
}

TEST_CASE("check_L3 monotone in hypothesis, probe below") {
  CHECK(check_L3(1.0, 4.0, linspace(0.1, 20.0, 200)).monotone);
  CHECK(check_L3(5.0, 3.5, linspace(0.1, 20.0, 200)).monotone);
  // p = 2.5 is outside the hypothesis: runs, result recorded, not asserted.
  const MonotoneCheck probe = check_L3(1.0, 2.5, linspace(0.1, 20.0, 200));
  INFO("p=2.5 worst violation " << probe.worst_violation);
  CHECK(probe.values.size() == 200);
}

TEST_CASE("lemma_sum point values") {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(lemma_sum(inv_sqrt2, inv_sqrt2, 0.0, 4.0) == Catch::Approx(8.0));
  CHECK(lemma_sum(0.0, 1.0, 0.0, 4.0) == Catch::Approx(4.0));
  CHECK(lemma_sum(0.0, 1.0, 1.0, 4.0) == Catch::Approx(32.0));
}

TEST_CASE("check_L4 argmax at the balanced point") {
  const ArgmaxCheck a = check_L4(0.0, 4.0, 1.0, 10000);
  CHECK(a.argmax_at_balance);
  CHECK(a.increase_toward_balance.monotone);

  const ArgmaxCheck b = check_L4(2.0, 5.0, 1.0, 10000);
  CHECK(b.argmax_at_balance);
  CHECK(b.increase_toward_balance.monotone);

  // Boundary p = 3: probe only.
  const ArgmaxCheck probe = check_L4(1.0, 3.0, 1.0, 1000);
  CHECK(probe.grid_size == 1000);
}

TEST_CASE("check_L6 equal coefficients dominate") {
  // n = 2, xi = 0, p = 4 matches the balanced L4 value and the closed form.
  const L6Check c = check_L6(2, 1.0, 0.0, 4.0, 200, 11);
  CHECK(c.holds);
  CHECK(c.equal_coefficient_value == Catch::Approx(rademacher_pnorm(2, 4.0)).epsilon(1e-13));

  CHECK(check_L6(3, 1.0, 1.0, 5.0, 500, 12).holds);

  // Only-if direction: a vector with a zero coefficient is strictly worse.
  const double equal = rademacher_shifted_pnorm(1.0, {1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}, 5.0);
  const double degenerate = rademacher_shifted_pnorm(1.0, {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0}, 5.0);
  CHECK(degenerate < equal - 1e-6);
}

TEST_CASE("check_L8 monotone for mean-zero step functions") {
  StepFunction halves(make_grid({Rational(0), Rational(1, 2), Rational(1)}), {Rational(1), Rational(-1)});
  const MonotoneCheck c = check_L8(halves, 1.0, 4.0, {1.0, 2.0});
  CHECK(c.monotone);
  // h(1) = ((1+1)^4 + (1-1)^4)/2 = 8, h(2) = ((1+2)^4 + (1-2)^4)/2 = 41.
  CHECK(c.values[0] == Catch::Approx(8.0));
  CHECK(c.values[1] == Catch::Approx(41.0));

  // xi = 0: h(x) = x^p ||g||_p^p.
  CHECK(check_L8(halves, 0.0, 4.0, linspace(0.1, 10.0, 100)).monotone);

  StepFunction thirds(make_grid({Rational(0), Rational(1, 3), Rational(1)}), {Rational(2), Rational(-1)});
  CHECK(check_L8(thirds, 1.0, 3.0, linspace(0.1, 10.0, 500)).monotone);

  StepFunction skewed(make_grid({Rational(0), Rational(1, 2), Rational(1)}), {Rational(1), Rational(1)});
  CHECK(code_of([&] { check_L8(skewed, 1.0, 4.0, {1.0, 2.0}); }) == ErrorCode::NotMeanZero);
  StepFunction zero(make_grid({Rational(0), Rational(1)}), {Rational(0)});
  CHECK(code_of([&] { check_L8(zero, 1.0, 4.0, {1.0}); }) == ErrorCode::DomainError);
}

TEST_CASE("brute_rademacher_pnorm enumeration") {
  CHECK(brute_rademacher_pnorm(1, 3.0) == Catch::Approx(1.0));
  CHECK(brute_rademacher_pnorm(2, 4.0) == Catch::Approx(std::pow(2.0, 0.25)).epsilon(1e-14));
  // n = 3, p = 3: (60/8) / 3^(3/2), cube root.
  CHECK(brute_rademacher_pnorm(3, 3.0) ==
        Catch::Approx(std::pow(7.5 / std::pow(3.0, 1.5), 1.0 / 3.0)).epsilon(1e-14));
  CHECK(code_of([] { brute_rademacher_pnorm(21, 3.0); }) == ErrorCode::SizeLimit);
}
