#pragma once

#include "vsnash/prox.hpp"
#include "vsnash/types.hpp"

#include <optional>
#include <vector>

namespace vsnash {

/// Problem constants of a strongly monotone game.
struct GameConstants {
  double eta = 0.0;    // strong-monotonicity modulus
  double lip = 0.0;    // Lipschitz constant of the concatenated gradient
  double kappa = 1.0;  // lip / eta
  double nu = 0.0;     // total per-sample noise bound, nu^2 = sum_i nu_i^2
  Vector nu_players;   // per-player noise bounds (may be empty)
  std::optional<double> m_compact;  // sum_j max_{x_j in R_j} ||x_j||, compact domains only
};

/// eta = lambda_min((J + J^T)/2), L = sigma_max(J). Throws NotStronglyMonotone
/// when eta <= 0.
GameConstants monotonicity_constants(const Matrix& jacobian);

/// Game whose players' smooth costs are quadratic; the concatenated gradient
/// is G(x) = H x + c. Block row i of H holds the partial Hessians of f_i.
class QuadraticGame {
 public:
  QuadraticGame(BlockLayout layout, Matrix H, Vector c, std::vector<Regularizer> regs);
  /// Unregularized game.
  QuadraticGame(BlockLayout layout, Matrix H, Vector c);

  const BlockLayout& layout() const { return layout_; }
  Index players() const { return layout_.players(); }
  Index dim() const { return layout_.total(); }
  const Matrix& hessian() const { return H_; }
  const Matrix& jacobian() const { return H_; }
  const Vector& linear() const { return c_; }
  const std::vector<Regularizer>& regularizers() const { return regs_; }
  const GameConstants& constants() const { return constants_; }

  /// Q_ij block (d_i x d_j).
  Matrix block(Index i, Index j) const;

  /// Exact G(x) = H x + c.
  Vector gradient(const Eigen::Ref<const Vector>& x) const;

  bool unconstrained() const;

 private:
  BlockLayout layout_;
  Matrix H_;
  Vector c_;
  std::vector<Regularizer> regs_;
  GameConstants constants_;
};

/// Scalar Nash-Cournot game. Player i picks x_i in [lo_i, hi_i] and pays
///   f_i(x_i, y) = a_i x_i^2 / 2 + b_i x_i - x_i (d - c_price * y),
/// evaluated at the aggregate y = sum_j x_j.
struct CournotParams {
  Vector a;
  Vector b;
  double d = 0.0;
  double c_price = 0.0;
  Vector lo;
  Vector hi;
};

class AggregativeGame {
 public:
  explicit AggregativeGame(CournotParams params);

  const BlockLayout& layout() const { return layout_; }
  Index players() const { return layout_.players(); }
  Index dim() const { return layout_.total(); }
  const CournotParams& params() const { return p_; }
  const std::vector<Regularizer>& regularizers() const { return regs_; }
  const GameConstants& constants() const { return constants_; }

  /// d/dx_i f_i(x_i, x_i + xbar_{-i}) written in terms of the full aggregate y.
  double player_gradient(Index i, double xi, double aggregate) const;

  /// phi(x) with the true aggregate.
  Vector gradient(const Eigen::Ref<const Vector>& x) const;

  /// Constant Jacobian diag(a_i + c) + c 11^T.
  Matrix jacobian() const;

  /// L_i: Lipschitz constant of player_gradient in the aggregate.
  Vector aggregate_lipschitz() const;

  /// M = sum_j max_{x_j in R_j} |x_j|.
  double m_compact() const;

  /// The same game seen as a block-quadratic game (phi is affine).
  QuadraticGame as_quadratic() const;

 private:
  CournotParams p_;
  BlockLayout layout_;
  std::vector<Regularizer> regs_;
  GameConstants constants_;
};

Vector gradient_map(const QuadraticGame& game, const StrategyProfile& x);
Vector gradient_map(const AggregativeGame& game, const StrategyProfile& x);

/// ||x - prox_{alpha r}(x - alpha G(x))||; zero exactly at a Nash equilibrium.
double ne_residual(const QuadraticGame& game, const StrategyProfile& x, double alpha);
double ne_residual(const AggregativeGame& game, const StrategyProfile& x, double alpha);

struct OracleOptions {
  double tol = 1e-12;
  std::optional<double> alpha;  // defaults to eta / L^2
  long max_iter = 2'000'000;
};

/// Deterministic prox-gradient fixed-point iteration. The stopping test is
/// residual(x, alpha) <= tol * min(1, alpha), which bounds residual(x, a) by tol
/// for every a in (0, 1] as well as at alpha itself.
StrategyProfile solve_ne_oracle(const QuadraticGame& game, const OracleOptions& opts = {});
StrategyProfile solve_ne_oracle(const AggregativeGame& game, const OracleOptions& opts = {});

}  // namespace vsnash
