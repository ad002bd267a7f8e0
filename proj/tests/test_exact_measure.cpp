#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <set>

#include "khintmart/grid.hpp"
#include "khintmart/rational.hpp"
#include "khintmart/rng.hpp"
#include "khintmart/step_function.hpp"

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

StepFunction random_step(std::mt19937_64& rng, std::size_t max_atoms = 8, long bound = 6) {
  const std::size_t atoms = 1 + draw_below(rng, max_atoms);
  std::set<Rational> cuts;
  while (cuts.size() < atoms - 1) {
    Rational c = draw_rational(rng, 1, 16).abs();
    if (!c.is_zero() && c < Rational(1)) cuts.insert(c);
  }
  std::vector<Rational> bps = {Rational(0)};
  bps.insert(bps.end(), cuts.begin(), cuts.end());
  bps.push_back(Rational(1));
  std::vector<Rational> vals(atoms);
  for (auto& v : vals) v = draw_rational(rng, bound);
  return StepFunction(make_grid(std::move(bps)), std::move(vals));
}

}  // namespace

TEST_CASE("rational arithmetic is exact and canonical") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-3, -6) == Rational(1, 2));
  CHECK((Rational(1, 3) + Rational(1, 6)) == Rational(1, 2));
  CHECK((Rational(2, 3) * Rational(9, 4)) == Rational(3, 2));
  CHECK(Rational(-2).to_string() == "-2/1");
  CHECK(Rational::from_string("1/3").to_string() == "1/3");
  CHECK(Rational::from_string("7") == Rational(7));
  CHECK(Rational::from_string("-6/4") == Rational(-3, 2));
  CHECK(code_of([] { Rational::from_string("1/0"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { Rational::from_string("a/b"); }) == ErrorCode::ParseError);
}

TEST_CASE("rational_sqrt meets the declared precision") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    Rational x = draw_rational(rng, 100, 64).abs();
    if (x.is_zero()) continue;
    const Rational r = rational_sqrt(x, 60);
    // r^2/x within 2^-58 of 1 (relative error 2^-60 on the root itself).
    const Rational rel = (square(r) / x - Rational(1)).abs();
    CHECK(rel <= Rational(1, 1L << 58));
  }
  CHECK(rational_sqrt(Rational(4)) == Rational(2));
  CHECK(rational_sqrt(Rational(0)).is_zero());
  CHECK(code_of([] { rational_sqrt(Rational(-1)); }) == ErrorCode::DomainError);
}

TEST_CASE("make_grid basic shapes and errors") {
  CHECK(make_grid({Rational(0), Rational(1)})->atom_count() == 1);
  CHECK(make_grid({Rational(0), Rational(1)})->measure(0) == Rational(1));

  auto halves = make_grid({Rational(0), Rational(1, 2), Rational(1)});
  CHECK(halves->atom_count() == 2);
  CHECK(halves->measure(0) == Rational(1, 2));
  CHECK(halves->measure(1) == Rational(1, 2));

  auto mixed = make_grid({Rational(0), Rational(1, 3), Rational(1, 2), Rational(1)});
  CHECK(mixed->measure(0) == Rational(1, 3));
  CHECK(mixed->measure(1) == Rational(1, 6));
  CHECK(mixed->measure(2) == Rational(1, 2));

  CHECK(code_of([] { make_grid({Rational(0), Rational(1, 2), Rational(1, 3), Rational(1)}); }) ==
        ErrorCode::NonMonotoneBreakpoints);
  CHECK(code_of([] { make_grid({Rational(0), Rational(1, 2)}); }) == ErrorCode::BadEndpoints);
  CHECK(code_of([] { make_grid({Rational(1, 4), Rational(1)}); }) == ErrorCode::BadEndpoints);
}

TEST_CASE("refine produces the common refinement with order-preserving maps") {
  auto g = make_grid({Rational(0), Rational(1, 2), Rational(1)});
  auto same = refine(*g, *g);
  CHECK(*same.common == *g);
  CHECK(same.from_a == std::vector<std::size_t>{0, 1});
  CHECK(same.from_b == std::vector<std::size_t>{0, 1});

  auto thirds = make_grid({Rational(0), Rational(1, 3), Rational(1)});
  auto r = refine(*g, *thirds);
  CHECK(r.common->breakpoints() ==
        std::vector<Rational>{Rational(0), Rational(1, 3), Rational(1, 2), Rational(1)});
  CHECK(r.from_a == std::vector<std::size_t>{0, 0, 1});
  CHECK(r.from_b == std::vector<std::size_t>{0, 1, 1});

  auto unit = make_grid({Rational(0), Rational(1)});
  auto quarter = make_grid({Rational(0), Rational(1, 4), Rational(1)});
  CHECK(*refine(*unit, *quarter).common == *quarter);
}

TEST_CASE("split_atom computes the exact cut and handles degenerate ratios") {
  auto unit = make_grid({Rational(0), Rational(1)});
  auto halves = split_atom(unit, 0, Rational(1, 2));
  CHECK(halves->breakpoints() == std::vector<Rational>{Rational(0), Rational(1, 2), Rational(1)});

  // c = (1-l)a + l*b with a=1/3, b=1, l=1/4.
  auto g = make_grid({Rational(0), Rational(1, 3), Rational(1)});
  const Rational expected_cut = (Rational(1) - Rational(1, 4)) * Rational(1, 3) + Rational(1, 4) * Rational(1);
  CHECK(expected_cut == Rational(1, 2));
  auto split = split_atom(g, 1, Rational(1, 4));
  CHECK(split->breakpoints() ==
        std::vector<Rational>{Rational(0), Rational(1, 3), Rational(1, 2), Rational(1)});

  CHECK(*split_atom(g, 1, Rational(1)) == *g);
  CHECK(*split_atom(g, 1, Rational(0)) == *g);
  CHECK(code_of([&] { split_atom(g, 5, Rational(1, 2)); }) == ErrorCode::AtomIndexOutOfRange);
}

TEST_CASE("integrate matches hand values exactly") {
  auto unit = make_grid({Rational(0), Rational(1)});
  CHECK(integrate(StepFunction(unit, {Rational(1)})) == Rational(1));

  auto halves = make_grid({Rational(0), Rational(1, 2), Rational(1)});
  CHECK(integrate(StepFunction(halves, {Rational(1), Rational(-1)})).is_zero());

  auto thirds = make_grid({Rational(0), Rational(1, 3), Rational(1)});
  CHECK(integrate(StepFunction(thirds, {Rational(2), Rational(-1)})).is_zero());
}

TEST_CASE("integrate_abs_pow matches closed forms") {
  auto unit = make_grid({Rational(0), Rational(1)});
  CHECK(integrate_abs_pow(StepFunction(unit, {Rational(-3)}), 2.5) == Catch::Approx(std::pow(3.0, 2.5)));

  auto halves = make_grid({Rational(0), Rational(1, 2), Rational(1)});
  for (double p : {1.0, 2.5, 4.0})
    CHECK(integrate_abs_pow(StepFunction(halves, {Rational(1), Rational(-1)}), p) == Catch::Approx(1.0));

  // 2 on [0,1/3), -1 on [1/3,1), p = 3: 8/3 + 2/3 = 10/3.
  auto thirds = make_grid({Rational(0), Rational(1, 3), Rational(1)});
  CHECK(integrate_abs_pow(StepFunction(thirds, {Rational(2), Rational(-1)}), 3) ==
        Catch::Approx(10.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("integrate is exactly linear on random step functions") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    StepFunction f = random_step(rng);
    const Rational alpha = draw_rational(rng, 5);
    const Rational beta = draw_rational(rng, 5);
    std::vector<Rational> g_vals(f.atom_count());
    for (auto& v : g_vals) v = draw_rational(rng, 6);
    StepFunction g(f.grid(), g_vals);
    std::vector<Rational> combo(f.atom_count());
    for (std::size_t a = 0; a < combo.size(); ++a) combo[a] = alpha * f.value(a) + beta * g.value(a);
    CHECK(integrate(StepFunction(f.grid(), combo)) == alpha * integrate(f) + beta * integrate(g));
  }
}

TEST_CASE("p-norms are nondecreasing in p on a probability space") {
  std::mt19937_64 rng(13);
  const std::vector<double> ps = {1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0};
  for (int trial = 0; trial < 50; ++trial) {
    StepFunction f = random_step(rng);
    double prev = 0;
    for (double p : ps) {
      const double norm = std::pow(integrate_abs_pow(f, p), 1.0 / p);
      CHECK(norm >= prev - 1e-12 * std::max(1.0, prev));
      prev = norm;
    }
  }
}

TEST_CASE("split_atom preserves measure and integrals with duplicated values") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    StepFunction f = random_step(rng);
    const std::size_t atom = draw_below(rng, f.atom_count());
    const Rational ratio(draw_int(rng, 0, 7), 7);
    auto split = split_atom(f.grid(), atom, ratio);

    Rational total(0);
    for (std::size_t a = 0; a < split->atom_count(); ++a) total += split->measure(a);
    CHECK(total == Rational(1));

    std::vector<Rational> vals;
    for (std::size_t a = 0; a < f.atom_count(); ++a) {
      vals.push_back(f.value(a));
      if (a == atom && split->atom_count() > f.atom_count()) vals.push_back(f.value(a));
    }
    CHECK(integrate(StepFunction(split, vals)) == integrate(f));
  }
}
