#pragma once

#include "vsnash/game.hpp"

#include <cstdint>
#include <optional>

namespace vsnash {

struct QuadraticGameOptions {
  double own_eig_lo = 1.0;  // eigenvalue range of each Q_ii
  double own_eig_hi = 3.0;
  double linear_scale = 1.0;  // c ~ N(0, linear_scale^2)
  Regularizer regularizer = Regularizer::zero();  // applied to every player (box is per-coordinate)
  int max_tries = 100;
};

/// Random block-quadratic game: symmetric positive-definite own blocks Q_ii,
/// coupling blocks Q_ij of spectral norm about `coupling`. Redraws until the
/// game is strongly monotone; throws InvalidParameter after max_tries.
QuadraticGame generate_quadratic_game(Index players, Index dim, double coupling,
                                      std::uint64_t seed, const QuadraticGameOptions& opts = {});

/// Ranges used when the cost vectors are not given explicitly.
struct CournotRanges {
  double a_lo = 0.5, a_hi = 1.5;
  double b_lo = 0.0, b_hi = 0.5;
};

/// Nash-Cournot game. Empty `a` / `b` are drawn uniformly from `ranges` with
/// `seed`. Requires a_i + c_price > 0.
AggregativeGame generate_cournot_game(Index players, Vector a, Vector b, double d, double c_price,
                                      double lo, double hi, std::uint64_t seed,
                                      const CournotRanges& ranges = {});

}  // namespace vsnash
