#pragma once

// Exact martingale-difference systems on [0,1), Chang-Wilson-Wolff square
// functions, sharp Khintchine-type constants, the canonicalization
// transforms behind them, and numerical search for the open 2 < p < 3 range.

#include "khintmart/constants.hpp"
#include "khintmart/errors.hpp"
#include "khintmart/generators.hpp"
#include "khintmart/grid.hpp"
#include "khintmart/io.hpp"
#include "khintmart/lemma_oracles.hpp"
#include "khintmart/md_system.hpp"
#include "khintmart/norms.hpp"
#include "khintmart/rational.hpp"
#include "khintmart/rng.hpp"
#include "khintmart/search.hpp"
#include "khintmart/square_functions.hpp"
#include "khintmart/step_function.hpp"
#include "khintmart/transforms.hpp"
