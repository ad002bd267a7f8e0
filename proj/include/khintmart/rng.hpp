#pragma once

#include <cstdint>
#include <random>

#include "khintmart/rational.hpp"

namespace khintmart {

/// splitmix64 step; used to derive independent per-trial streams from one
/// master seed so trial results are reproducible regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial_index) {
  std::uint64_t s = master;
  splitmix64(s);
  s ^= 0xA0761D6478BD642FULL * (trial_index + 1);
  return splitmix64(s);
}

inline std::mt19937_64 make_trial_rng(std::uint64_t master, std::uint64_t trial_index) {
  return std::mt19937_64(trial_seed(master, trial_index));
}

/// Uniform draw in [0, n). Plain modulo: the mapping must stay fixed across
/// standard libraries, which std::uniform_int_distribution does not promise.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : rng() % n;
}

/// Uniform integer in [lo, hi] inclusive.
inline long draw_int(std::mt19937_64& rng, long lo, long hi) {
  return lo + static_cast<long>(draw_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Random small-denominator rational in [-bound, bound].
inline Rational draw_rational(std::mt19937_64& rng, long bound, long max_den = 8) {
  const long den = draw_int(rng, 1, max_den);
  const long num = draw_int(rng, -bound * den, bound * den);
  return Rational(num, den);
}

inline double draw_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace khintmart
