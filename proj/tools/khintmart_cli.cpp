// Command-line front end: validation, norms, proof transforms, constant
// tables, randomized inequality suites, lemma sweeps, and extremal search,
// all file-based and reproducible from a single seed.
//
// Exit codes: 0 success, 1 domain or verification failure, 2 I/O/parse
// failure.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "khintmart/khintmart.hpp"

namespace {

using namespace khintmart;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitParse = 2;

MDSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
  try {
    return md_from_json(j);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid MD-system document: ") + e.what());
  }
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

int cmd_validate(const std::string& input) {
  MDSystem d = load_system(input);
  const ValidationReport report = validate(d);
  std::cout << validation_report_to_json(report).dump(2) << "\n";
  return report.valid ? kExitOk : kExitFailure;
}

int cmd_norms(const std::string& input, double p) {
  MDSystem d = load_system(input);
  const auto cww = square_cww(d);
  const auto classical = square_classical(d);
  Json j;
  j["p"] = p;
  j["pnorm"] = pnorm_sum(d, p);
  j["sup_cww_sq"] = cww.sup_sq.to_string();
  j["sup_cww"] = cww.sup();
  j["sup_classical_sq"] = classical.sup_sq.to_string();
  j["sup_classical"] = classical.sup();
  j["homogeneity"] = homogeneity(d).to_string();
  if (!d.is_trivial()) j["u_ratio"] = u_ratio(d, p).ratio;
  j["trivial"] = d.is_trivial();
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_transform(const std::string& kind, const std::string& input, const std::string& output, std::size_t k,
                  std::size_t m, double p) {
  MDSystem d = load_system(input);
  Json report;
  std::optional<MDSystem> result;
  bool passed = false;
  if (kind == "r1") {
    auto [out, rep] = r1_transform(d, k, p);
    report = transform_report_to_json(rep);
    passed = rep.passed;
    result = std::move(out);
  } else if (kind == "r2") {
    auto [out, rep] = r2_transform(d, k, p);
    report = transform_report_to_json(rep);
    passed = rep.passed;
    result = std::move(out);
  } else if (kind == "proc1") {
    auto [out, rep] = procedure1(d, m, p);
    report = transform_report_to_json(rep);
    passed = rep.passed;
    result = std::move(out);
  } else if (kind == "proc2") {
    auto [out, rep] = procedure2(d, m, p);
    report = transform_report_to_json(rep);
    passed = rep.passed;
    result = std::move(out);
  } else if (kind == "dyadize") {
    auto [out, rep] = dyadize(d, p);
    report = pipeline_report_to_json(rep);
    passed = rep.passed;
    result = std::move(out);
  } else if (kind == "rademacherize") {
    auto [out, rep] = rademacherize(d, p);
    report = pipeline_report_to_json(rep);
    passed = rep.passed;
    result = std::move(out);
  } else {
    throw Error(ErrorCode::DomainError, "unknown transform kind '" + kind + "'");
  }
  if (!output.empty()) write_json(output, md_to_json(*result));
  std::cout << report.dump(2) << "\n";
  return passed ? kExitOk : kExitFailure;
}

int cmd_constants(double p, std::size_t n_max, const std::string& format) {
  const double limit = khintchine_constant(p);
  if (format == "csv") {
    std::cout << "p,n,rademacher_pnorm,khintchine_limit\n";
    for (std::size_t n = 1; n <= n_max; ++n)
      std::cout << p << "," << n << "," << std::setprecision(15) << rademacher_pnorm(n, p) << "," << limit << "\n";
  } else {
    Json rows = Json::array();
    for (std::size_t n = 1; n <= n_max; ++n)
      rows.push_back(Json{{"p", p}, {"n", n}, {"rademacher_pnorm", rademacher_pnorm(n, p)}});
    Json j;
    j["khintchine_constant"] = limit;
    j["rows"] = std::move(rows);
    std::cout << j.dump(2) << "\n";
  }
  return kExitOk;
}

struct TrialOutcome {
  BoundCheck check;
  double lambda = 0;  // parameter attaining the worst slack, when applicable
  bool has_lambda = false;
};

TrialOutcome run_suite_on(const std::string& suite, const MDSystem& d, double p, double tolerance) {
  TrialOutcome out;
  if (suite == "c1") {
    out.check = verify_khintchine(d, p, tolerance).sharp;
  } else if (suite == "c3") {
    out.has_lambda = true;
    bool first = true;
    for (double lambda = 0.05; lambda < 0.46; lambda += 0.05) {
      const BoundCheck c = mgf_ratio(d, lambda, tolerance);
      if (first || c.slack < out.check.slack) {
        out.check = c;
        out.lambda = lambda;
      }
      first = false;
    }
  } else if (suite == "c4") {
    out.check = luxemburg_norm(d, tolerance);
  } else if (suite == "cww" || suite == "ot2") {
    out.has_lambda = true;
    const TailMode mode = suite == "cww" ? TailMode::cww : TailMode::homogeneous;
    bool first = true;
    for (double lambda = 0.1; lambda < 3.05; lambda += 0.1) {
      const BoundCheck c = tail_check(d, lambda, mode, tolerance);
      if (first || c.slack < out.check.slack) {
        out.check = c;
        out.lambda = lambda;
      }
      first = false;
    }
  } else {
    throw Error(ErrorCode::DomainError, "unknown suite '" + suite + "'");
  }
  return out;
}

int cmd_verify(const std::string& suite, double p, std::size_t trials, std::uint64_t seed, std::size_t n_max,
               double tolerance, const std::string& violation_path) {
  if (suite == "c1" && !(p >= 3)) throw Error(ErrorCode::DomainError, "suite c1 requires p >= 3");
  bool all_hold = true;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto rng = make_trial_rng(seed, trial);
    const std::size_t n = 1 + draw_below(rng, n_max);
    const MDSystem d = random_md(n, 4, 8, trial_seed(seed, trial));
    const TrialOutcome outcome = run_suite_on(suite, d, p, tolerance);
    Json line{{"suite", suite}, {"p", p},        {"n", n},
              {"seed", seed},   {"trial", trial}, {"lhs", outcome.check.lhs},
              {"rhs", outcome.check.rhs}, {"slack", outcome.check.slack}, {"holds", outcome.check.holds}};
    if (outcome.has_lambda) line["lambda"] = outcome.lambda;
    std::cout << line.dump() << "\n";
    if (!outcome.check.holds) {
      all_hold = false;
      const std::string path = violation_path.empty()
                                   ? ("violation-" + suite + "-trial" + std::to_string(trial) + ".json")
                                   : violation_path;
      write_json(path, md_to_json(d));
      std::cerr << "violation witness written to " << path << "\n";
    }
  }
  return all_hold ? kExitOk : kExitFailure;
}

int cmd_lemmas(std::size_t trials, std::uint64_t seed) {
  Json j;
  bool ok = true;

  {
    Json l3 = Json::array();
    for (double xi : {1.0, 5.0}) {
      for (double p : {3.5, 4.0, 6.0}) {
        std::vector<double> grid;
        for (int i = 0; i <= 10000; ++i) grid.push_back(0.01 + (100.0 - 0.01) * i / 10000.0);
        const MonotoneCheck c = check_L3(xi, p, grid);
        ok = ok && c.monotone;
        l3.push_back(Json{{"xi", xi}, {"p", p}, {"monotone", c.monotone}, {"worst_violation", c.worst_violation}});
      }
    }
    j["L3"] = std::move(l3);
  }
  {
    Json l4 = Json::array();
    for (double xi : {0.0, 1.0, 2.0}) {
      for (double p : {3.5, 4.0, 5.0}) {
        for (double r : {1.0, 2.0}) {
          const ArgmaxCheck c = check_L4(xi, p, r, 10000);
          ok = ok && c.argmax_at_balance && c.increase_toward_balance.monotone;
          l4.push_back(Json{{"xi", xi},
                            {"p", p},
                            {"r", r},
                            {"argmax_at_balance", c.argmax_at_balance},
                            {"monotone", c.increase_toward_balance.monotone},
                            {"worst_violation", c.increase_toward_balance.worst_violation}});
        }
      }
    }
    j["L4"] = std::move(l4);
  }
  {
    Json l6 = Json::array();
    for (std::size_t n : {2, 3, 6}) {
      for (double xi : {0.0, 1.0}) {
        const L6Check c = check_L6(n, 1.0, xi, 4.0, trials, seed);
        ok = ok && c.holds;
        l6.push_back(Json{{"n", n},
                          {"xi", xi},
                          {"p", 4.0},
                          {"holds", c.holds},
                          {"violations", c.violations},
                          {"equal_coefficient_value", c.equal_coefficient_value},
                          {"best_trial_value", c.best_trial_value}});
      }
    }
    j["L6"] = std::move(l6);
  }
  {
    std::vector<double> x_grid;
    for (int i = 0; i <= 2000; ++i) x_grid.push_back(0.1 + (10.0 - 0.1) * i / 2000.0);
    const std::vector<StepFunction> gs = {
        StepFunction(make_grid({Rational(0), Rational(1, 2), Rational(1)}), {Rational(1), Rational(-1)}),
        StepFunction(make_grid({Rational(0), Rational(1, 3), Rational(1)}), {Rational(2), Rational(-1)}),
        StepFunction(make_grid({Rational(0), Rational(1, 4), Rational(1)}), {Rational(3), Rational(-1)}),
    };
    Json l8 = Json::array();
    for (std::size_t i = 0; i < gs.size(); ++i) {
      for (double xi : {1.0, 0.5}) {
        for (double p : {3.0, 4.0}) {
          const MonotoneCheck c = check_L8(gs[i], xi, p, x_grid);
          ok = ok && c.monotone;
          l8.push_back(Json{{"g", i}, {"xi", xi}, {"p", p}, {"monotone", c.monotone},
                            {"worst_violation", c.worst_violation}});
        }
      }
    }
    j["L8"] = std::move(l8);
  }
  j["all_hold"] = ok;
  std::cout << j.dump(2) << "\n";
  return ok ? kExitOk : kExitFailure;
}

int cmd_search(double p, std::size_t n, std::size_t budget, std::uint64_t seed, const std::string& method,
               const std::string& format, const std::string& output) {
  const SearchResult result = estimate_A(p, n, budget, seed, search_method_from_string(method));
  if (format == "csv") {
    std::cout << "p,n,best_value,evaluations\n"
              << p << "," << n << "," << std::setprecision(15) << result.best_value << "," << result.evaluations
              << "\n";
  } else {
    Json j = search_result_to_json(result);
    j["p"] = p;
    j["n"] = n;
    std::cout << j.dump(2) << "\n";
  }
  if (!output.empty()) write_json(output, md_to_json(result.witness));
  return kExitOk;
}

int cmd_scan(double p_min, double p_max, double step, std::size_t n_max, const std::string& format) {
  const auto rows = pscan(p_min, p_max, step, n_max);
  if (format == "csv") {
    std::cout << "p,n,value,decreased\n";
    for (const auto& r : rows)
      std::cout << r.p << "," << r.n << "," << std::setprecision(15) << r.value << "," << (r.decreased ? 1 : 0)
                << "\n";
  } else {
    Json j = Json::array();
    for (const auto& r : rows)
      j.push_back(Json{{"p", r.p}, {"n", r.n}, {"value", r.value}, {"decreased", r.decreased}});
    std::cout << j.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact martingale-difference systems, square functions, and sharp Khintchine-type constants"};
  app.require_subcommand(1);

  std::string input, output, format = "json", kind, suite, method = "nelder-mead";
  double p = 4.0, p_min = 2.05, p_max = 3.0, step = 0.05, tolerance = 1e-9;
  std::size_t n = 6, n_max = 10, k = 1, m = 2, trials = 1000, budget = 100000;
  std::uint64_t seed = 1;

  auto* validate_cmd = app.add_subcommand("validate", "check a MD-system file against the exact invariants");
  validate_cmd->add_option("file", input, "MD-system JSON file")->required();

  auto* norms_cmd = app.add_subcommand("norms", "p-norm, square-function sups and ratio of a MD-system file");
  norms_cmd->add_option("file", input, "MD-system JSON file")->required();
  norms_cmd->add_option("--p", p, "exponent");

  auto* transform_cmd = app.add_subcommand("transform", "apply a proof transform and emit its certificate");
  transform_cmd->add_option("--kind", kind, "r1|r2|proc1|proc2|dyadize|rademacherize")->required();
  transform_cmd->add_option("-i,--input", input, "input MD-system JSON")->required();
  transform_cmd->add_option("-o,--output", output, "output MD-system JSON");
  transform_cmd->add_option("--k", k, "level for r1/r2");
  transform_cmd->add_option("--m", m, "level for proc1/proc2");
  transform_cmd->add_option("--p", p, "exponent");

  auto* constants_cmd = app.add_subcommand("constants", "sharp constants table");
  constants_cmd->add_option("--p", p, "exponent")->required();
  constants_cmd->add_option("--n-max", n_max, "largest n");
  constants_cmd->add_option("--format", format, "json|csv");

  auto* verify_cmd = app.add_subcommand("verify", "randomized verification suite for a named bound");
  verify_cmd->add_option("--suite", suite, "c1|c3|c4|cww|ot2")->required();
  verify_cmd->add_option("--p", p, "exponent (c1)");
  verify_cmd->add_option("--trials", trials, "number of random systems");
  verify_cmd->add_option("--seed", seed, "master seed");
  verify_cmd->add_option("--n", n, "largest level count");
  verify_cmd->add_option("--tolerance", tolerance, "slack tolerance");
  verify_cmd->add_option("-o,--output", output, "violation witness path");

  auto* lemmas_cmd = app.add_subcommand("lemmas", "numeric sweeps for the monotonicity/argmax lemmas");
  lemmas_cmd->add_option("--trials", trials, "random trials for the coefficient lemma");
  lemmas_cmd->add_option("--seed", seed, "master seed");

  auto* search_cmd = app.add_subcommand("search", "derivative-free extremal search");
  search_cmd->add_option("--p", p, "exponent")->required();
  search_cmd->add_option("--n", n, "depth")->required();
  search_cmd->add_option("--budget", budget, "objective evaluations");
  search_cmd->add_option("--seed", seed, "master seed");
  search_cmd->add_option("--method", method, "nelder-mead|coordinate|random-restart");
  search_cmd->add_option("--format", format, "json|csv");
  search_cmd->add_option("-o,--output", output, "witness MD-system path");

  auto* scan_cmd = app.add_subcommand("scan", "n-monotonicity scan of the sharp constants over a p grid");
  scan_cmd->add_option("--p-min", p_min, "lower p");
  scan_cmd->add_option("--p-max", p_max, "upper p");
  scan_cmd->add_option("--step", step, "p step");
  scan_cmd->add_option("--n-max", n_max, "largest n");
  scan_cmd->add_option("--format", format, "json|csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return cmd_validate(input);
    if (norms_cmd->parsed()) return cmd_norms(input, p);
    if (transform_cmd->parsed()) return cmd_transform(kind, input, output, k, m, p);
    if (constants_cmd->parsed()) return cmd_constants(p, n_max, format);
    if (verify_cmd->parsed()) return cmd_verify(suite, p, trials, seed, n, tolerance, output);
    if (lemmas_cmd->parsed()) return cmd_lemmas(trials, seed);
    if (search_cmd->parsed()) return cmd_search(p, n, budget, seed, method, format, output);
    if (scan_cmd->parsed()) return cmd_scan(p_min, p_max, step, n_max, format);
  } catch (const khintmart::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == khintmart::ErrorCode::ParseError ? kExitParse : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
