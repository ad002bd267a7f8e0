#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "khintmart/constants.hpp"
#include "khintmart/md_system.hpp"
#include "khintmart/norms.hpp"
#include "khintmart/rng.hpp"

namespace khintmart {

/// Point of the extremal search space: a dyadic system of given depth with
/// one nonnegative modulus per node of the full binary tree (the value of
/// |d_k| on each level-(k-1) cell); signs are fixed +/- on the two children.
/// Feasible when every root-to-leaf path has sum of squared moduli <= 1,
/// i.e. ||S||_inf <= 1.
struct HaarCandidate {
  std::size_t depth = 0;
  std::vector<double> coeff;  // 2^depth - 1 values, heap order

  static std::size_t node(std::size_t level, std::size_t prefix) { return ((std::size_t{1} << (level - 1)) - 1) + prefix; }

  static HaarCandidate equal(std::size_t depth) {
    HaarCandidate c;
    c.depth = depth;
    c.coeff.assign((std::size_t{1} << depth) - 1, 1.0 / std::sqrt(static_cast<double>(depth)));
    return c;
  }
};

namespace detail {

inline double max_path_sumsq(const HaarCandidate& c) {
  const std::size_t leaves = std::size_t{1} << c.depth;
  double worst = 0;
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    double s = 0;
    for (std::size_t k = 1; k <= c.depth; ++k) {
      const double v = c.coeff[HaarCandidate::node(k, leaf >> (c.depth - k + 1))];
      s += v * v;
    }
    worst = std::max(worst, s);
  }
  return worst;
}

/// U(c) evaluated directly on the tree in floating point; scale-invariant.
inline double tree_objective(const HaarCandidate& c, double p) {
  const std::size_t leaves = std::size_t{1} << c.depth;
  const double sup_sq = max_path_sumsq(c);
  if (sup_sq <= 0) return 0;
  KahanSum acc;
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    double f = 0;
    for (std::size_t k = 1; k <= c.depth; ++k) {
      const double v = c.coeff[HaarCandidate::node(k, leaf >> (c.depth - k + 1))];
      f += ((leaf >> (c.depth - k)) & 1u) ? -v : v;
    }
    acc.add(std::pow(std::fabs(f), p));
  }
  const double pnorm = std::pow(acc.value() / static_cast<double>(leaves), 1.0 / p);
  return pnorm / std::sqrt(sup_sq);
}

/// Scales onto the feasibility boundary (max path sum of squares = 1) and
/// drops signs; U is invariant under both moves.
inline void project(HaarCandidate& c) {
  for (double& v : c.coeff) v = std::fabs(v);
  const double sup_sq = max_path_sumsq(c);
  if (sup_sq > 0) {
    const double scale = 1.0 / std::sqrt(sup_sq);
    for (double& v : c.coeff) v *= scale;
  }
}

}  // namespace detail

/// Materializes a feasible candidate as a dyadic MDSystem on the uniform
/// 2^depth grid; doubles convert to rationals exactly.
inline MDSystem candidate_to_md(const HaarCandidate& c) {
  if (c.depth < 1 || c.coeff.size() != (std::size_t{1} << c.depth) - 1)
    throw Error(ErrorCode::Infeasible, "malformed candidate");
  if (detail::max_path_sumsq(c) > 1.0 + 1e-9)
    throw Error(ErrorCode::Infeasible, "candidate violates the path sum-of-squares bound");
  const std::size_t n = c.depth;
  const std::size_t atoms = std::size_t{1} << n;
  GridPtr grid = make_uniform_grid(atoms);
  std::vector<CellLabeling> partitions(n);
  std::vector<std::vector<Rational>> values(n);
  for (std::size_t k = 1; k <= n; ++k) {
    partitions[k - 1].labels.resize(atoms);
    values[k - 1].resize(atoms);
    for (std::size_t a = 0; a < atoms; ++a) {
      partitions[k - 1].labels[a] = static_cast<std::uint32_t>(a >> (n - k));
      const Rational v = Rational::from_double(c.coeff[HaarCandidate::node(k, a >> (n - k + 1))]);
      values[k - 1][a] = ((a >> (n - k)) & 1u) ? -v : v;
    }
  }
  return MDSystem(grid, std::move(partitions), std::move(values));
}

enum class SearchMethod { nelder_mead, coordinate, random_restart };

inline SearchMethod search_method_from_string(const std::string& s) {
  if (s == "nelder-mead") return SearchMethod::nelder_mead;
  if (s == "coordinate") return SearchMethod::coordinate;
  if (s == "random-restart") return SearchMethod::random_restart;
  throw Error(ErrorCode::DomainError, "unknown search method '" + s + "'");
}

struct SearchResult {
  double best_value = 0;
  MDSystem witness;
  std::size_t evaluations = 0;
  std::vector<std::pair<std::size_t, double>> trace;  // improvement log
};

namespace detail {

struct SearchState {
  double p;
  std::size_t budget;
  std::size_t evaluations = 0;
  double best = -1;
  HaarCandidate best_candidate;
  std::vector<std::pair<std::size_t, double>> trace;

  bool exhausted() const { return evaluations >= budget; }

  double eval(HaarCandidate c) {
    if (exhausted()) return -1;
    ++evaluations;
    project(c);
    const double value = tree_objective(c, p);
    if (value > best) {
      best = value;
      best_candidate = c;
      trace.emplace_back(evaluations, value);
    }
    return value;
  }
};

inline HaarCandidate random_candidate(std::size_t depth, std::mt19937_64& rng) {
  HaarCandidate c;
  c.depth = depth;
  c.coeff.resize((std::size_t{1} << depth) - 1);
  for (double& v : c.coeff) v = 0.05 + draw_unit(rng);
  project(c);
  return c;
}

/// Classic Nelder-Mead on the coefficient vector; every proposal is
/// projected before evaluation, so the walk stays on the feasible boundary.
inline void nelder_mead_run(SearchState& state, const HaarCandidate& start, std::size_t run_budget,
                            std::mt19937_64& rng) {
  const std::size_t dim = start.coeff.size();
  const std::size_t stop = std::min(state.budget, state.evaluations + run_budget);
  using Vertex = std::pair<HaarCandidate, double>;
  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  simplex.emplace_back(start, state.eval(start));
  for (std::size_t j = 0; j < dim && state.evaluations < stop; ++j) {
    HaarCandidate v = start;
    const double delta = std::max(0.1 * std::fabs(v.coeff[j]), 0.05) * (draw_unit(rng) < 0.5 ? 1.0 : -1.0);
    v.coeff[j] += delta;
    simplex.emplace_back(v, state.eval(v));
  }
  if (simplex.size() < dim + 1) return;

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  auto worse = [](const Vertex& a, const Vertex& b) { return a.second > b.second; };  // maximizing
  while (state.evaluations < stop && !state.exhausted()) {
    std::sort(simplex.begin(), simplex.end(), worse);
    HaarCandidate centroid = simplex[0].first;
    std::fill(centroid.coeff.begin(), centroid.coeff.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) centroid.coeff[j] += simplex[i].first.coeff[j] / static_cast<double>(dim);

    Vertex& worst = simplex.back();
    HaarCandidate reflected = centroid;
    for (std::size_t j = 0; j < dim; ++j)
      reflected.coeff[j] = centroid.coeff[j] + alpha * (centroid.coeff[j] - worst.first.coeff[j]);
    const double fr = state.eval(reflected);

    if (fr > simplex[0].second) {
      HaarCandidate expanded = centroid;
      for (std::size_t j = 0; j < dim; ++j)
        expanded.coeff[j] = centroid.coeff[j] + gamma * (reflected.coeff[j] - centroid.coeff[j]);
      const double fe = state.eval(expanded);
      worst = fe > fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
    } else if (fr > simplex[dim - 1].second) {
      worst = {reflected, fr};
    } else {
      HaarCandidate contracted = centroid;
      for (std::size_t j = 0; j < dim; ++j)
        contracted.coeff[j] = centroid.coeff[j] + rho * (worst.first.coeff[j] - centroid.coeff[j]);
      const double fc = state.eval(contracted);
      if (fc > worst.second) {
        worst = {contracted, fc};
      } else {
        for (std::size_t i = 1; i <= dim && !state.exhausted(); ++i) {
          for (std::size_t j = 0; j < dim; ++j)
            simplex[i].first.coeff[j] =
                simplex[0].first.coeff[j] + sigma * (simplex[i].first.coeff[j] - simplex[0].first.coeff[j]);
          simplex[i].second = state.eval(simplex[i].first);
        }
      }
    }
    // Converged simplex: restart is the caller's business.
    double spread = 0;
    for (const auto& v : simplex) spread = std::max(spread, std::fabs(v.second - simplex[0].second));
    if (spread < 1e-13) break;
  }
}

inline void coordinate_run(SearchState& state, HaarCandidate current, std::size_t run_budget) {
  const std::size_t stop = std::min(state.budget, state.evaluations + run_budget);
  double base = state.eval(current);
  double step = 0.25;
  while (state.evaluations < stop && step > 1e-10) {
    bool improved = false;
    for (std::size_t j = 0; j < current.coeff.size() && state.evaluations < stop; ++j) {
      for (const double direction : {1.0, -1.0}) {
        HaarCandidate trial = current;
        trial.coeff[j] = std::max(0.0, trial.coeff[j] + direction * step);
        const double value = state.eval(trial);
        if (value > base) {
          current = trial;
          base = value;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
}

}  // namespace detail

/// Derivative-free lower-bound search for the extremal ratio over dyadic
/// systems of depth n. For p >= 3 the known sharp value acts as a ceiling:
/// exceeding it means a bug, and the search aborts loudly.
inline SearchResult estimate_A(double p, std::size_t n, std::size_t budget, std::uint64_t seed,
                               SearchMethod method = SearchMethod::nelder_mead) {
  if (!(p > 2)) throw Error(ErrorCode::DomainError, "estimate_A requires p > 2");
  if (n < 1 || n > 12) throw Error(ErrorCode::DomainError, "estimate_A requires 1 <= n <= 12");
  if (budget < 1) throw Error(ErrorCode::DomainError, "estimate_A requires budget >= 1");

  detail::SearchState state;
  state.p = p;
  state.budget = budget;
  state.best_candidate = HaarCandidate::equal(n);

  const std::size_t dim = (std::size_t{1} << n) - 1;

  // Deterministic start list: the balanced point, lower-depth Rademacher
  // systems embedded at the top levels, then random restarts.
  std::vector<HaarCandidate> starts;
  starts.push_back(HaarCandidate::equal(n));
  for (std::size_t m = 1; m < n; ++m) {
    HaarCandidate c;
    c.depth = n;
    c.coeff.assign(dim, 0.0);
    for (std::size_t k = 1; k <= m; ++k)
      for (std::size_t j = 0; j < (std::size_t{1} << (k - 1)); ++j)
        c.coeff[HaarCandidate::node(k, j)] = 1.0 / std::sqrt(static_cast<double>(m));
    starts.push_back(std::move(c));
  }

  std::size_t restarts = std::max<std::size_t>(starts.size() + 2, std::min<std::size_t>(16, budget / (60 * dim + 1)));
  const std::size_t run_budget = std::max<std::size_t>(1, budget / restarts);
  for (std::size_t r = 0; r < restarts && !state.exhausted(); ++r) {
    auto rng = make_trial_rng(seed, r);
    HaarCandidate start = r < starts.size() ? starts[r] : detail::random_candidate(n, rng);
    switch (method) {
      case SearchMethod::nelder_mead:
        detail::nelder_mead_run(state, start, run_budget, rng);
        break;
      case SearchMethod::coordinate:
        detail::coordinate_run(state, start, run_budget);
        break;
      case SearchMethod::random_restart:
        for (std::size_t i = 0; i < run_budget / 2 && !state.exhausted(); ++i)
          state.eval(detail::random_candidate(n, rng));
        detail::nelder_mead_run(state, state.best_candidate, run_budget - run_budget / 2, rng);
        break;
    }
  }

  if (p >= 3) {
    const double ceiling = rademacher_pnorm(n, p);
    if (state.best > ceiling + 1e-9)
      throw Error(ErrorCode::CeilingViolation,
                  "search value " + std::to_string(state.best) + " exceeds the sharp constant " +
                      std::to_string(ceiling));
  }

  detail::project(state.best_candidate);
  SearchResult result{state.best, candidate_to_md(state.best_candidate), state.evaluations, std::move(state.trace)};
  return result;
}

struct PScanRow {
  double p = 0;
  std::size_t n = 0;
  double value = 0;       // rademacher_pnorm(n, p)
  bool decreased = false;  // value < value at n-1, beyond 1e-12
};

/// Sweep of the fixed-n sharp Rademacher constants over a p-grid, flagging
/// every (p, n) where the sequence decreases in n. Decreases appear only
/// below p = 3.
inline std::vector<PScanRow> pscan(double p_min, double p_max, double step, std::size_t n_max) {
  if (!(2 < p_min && p_min < p_max && step > 0)) throw Error(ErrorCode::DomainError, "pscan requires 2 < p_min < p_max");
  std::vector<PScanRow> rows;
  for (double p = p_min; p <= p_max + 1e-12; p += step) {
    double prev = 0;
    for (std::size_t n = 1; n <= n_max; ++n) {
      const double value = rademacher_pnorm(n, p);
      rows.push_back({p, n, value, n > 1 && value < prev - 1e-12});
      prev = value;
    }
  }
  return rows;
}

}  // namespace khintmart
