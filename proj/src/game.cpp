#include "vsnash/game.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vsnash {

GameConstants monotonicity_constants(const Matrix& jacobian) {
  require(jacobian.rows() == jacobian.cols() && jacobian.rows() > 0, "Jacobian must be square");
  if (!jacobian.allFinite())
    throw Error(ErrorCategory::InvalidParameter, "Jacobian has non-finite entries");
  const Matrix sym = 0.5 * (jacobian + jacobian.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const double eta = es.eigenvalues().minCoeff();
  if (!(eta > 0.0)) {
    std::ostringstream os;
    os << "gradient map is not strongly monotone: lambda_min of symmetric part = " << eta;
    throw Error(ErrorCategory::NotStronglyMonotone, os.str());
  }
  Eigen::JacobiSVD<Matrix> svd(jacobian);
  GameConstants k;
  k.eta = eta;
  k.lip = std::max(svd.singularValues()(0), eta);
  k.kappa = k.lip / k.eta;
  return k;
}

namespace {

void check_regularizers(const BlockLayout& layout, const std::vector<Regularizer>& regs) {
  require(static_cast<Index>(regs.size()) == layout.players(),
          "one regularizer per player required");
  for (Index i = 0; i < layout.players(); ++i)
    if (const auto* b = regs[static_cast<std::size_t>(i)].as_box())
      require(b->lo.size() == layout.dim(i), "box dimension does not match player dimension");
}

}  // namespace

QuadraticGame::QuadraticGame(BlockLayout layout, Matrix H, Vector c, std::vector<Regularizer> regs)
    : layout_(std::move(layout)), H_(std::move(H)), c_(std::move(c)), regs_(std::move(regs)) {
  require(H_.rows() == layout_.total() && H_.cols() == layout_.total(),
          "H must be n x n with n the total strategy dimension");
  require(c_.size() == layout_.total(), "c must have the total strategy dimension");
  if (!c_.allFinite()) throw Error(ErrorCategory::InvalidParameter, "c has non-finite entries");
  check_regularizers(layout_, regs_);
  constants_ = monotonicity_constants(H_);
}

QuadraticGame::QuadraticGame(BlockLayout layout, Matrix H, Vector c)
    : QuadraticGame(layout, std::move(H), std::move(c),
                    std::vector<Regularizer>(static_cast<std::size_t>(layout.players()),
                                             Regularizer::zero())) {}

Matrix QuadraticGame::block(Index i, Index j) const {
  return H_.block(layout_.offset(i), layout_.offset(j), layout_.dim(i), layout_.dim(j));
}

Vector QuadraticGame::gradient(const Eigen::Ref<const Vector>& x) const {
  require(x.size() == dim(), "profile dimension mismatch");
  return H_ * x + c_;
}

bool QuadraticGame::unconstrained() const {
  return std::all_of(regs_.begin(), regs_.end(), [](const Regularizer& r) {
    return std::holds_alternative<ZeroRegularizer>(r.variant());
  });
}

AggregativeGame::AggregativeGame(CournotParams params) : p_(std::move(params)) {
  const Index n = p_.a.size();
  require(n > 0, "Cournot game needs at least one player");
  require(p_.b.size() == n && p_.lo.size() == n && p_.hi.size() == n,
          "Cournot parameter vectors must all have one entry per player");
  if (!p_.a.allFinite() || !p_.b.allFinite() || !std::isfinite(p_.d) || !std::isfinite(p_.c_price))
    throw Error(ErrorCategory::InvalidParameter, "Cournot parameters must be finite");
  layout_ = BlockLayout::scalar(n);
  regs_.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    regs_.push_back(Regularizer::box(Vector::Constant(1, p_.lo(i)), Vector::Constant(1, p_.hi(i))));
  constants_ = monotonicity_constants(jacobian());
  constants_.m_compact = m_compact();
}

double AggregativeGame::player_gradient(Index i, double xi, double aggregate) const {
  return p_.a(i) * xi + p_.b(i) - p_.d + p_.c_price * aggregate + p_.c_price * xi;
}

Vector AggregativeGame::gradient(const Eigen::Ref<const Vector>& x) const {
  require(x.size() == dim(), "profile dimension mismatch");
  const double agg = x.sum();
  Vector g(dim());
  for (Index i = 0; i < dim(); ++i) g(i) = player_gradient(i, x(i), agg);
  return g;
}

Matrix AggregativeGame::jacobian() const {
  const Index n = dim();
  Matrix J = Matrix::Constant(n, n, p_.c_price);
  J.diagonal() += (p_.a.array() + p_.c_price).matrix();
  return J;
}

Vector AggregativeGame::aggregate_lipschitz() const {
  return Vector::Constant(dim(), std::abs(p_.c_price));
}

double AggregativeGame::m_compact() const {
  return p_.lo.cwiseAbs().cwiseMax(p_.hi.cwiseAbs()).sum();
}

QuadraticGame AggregativeGame::as_quadratic() const {
  return QuadraticGame(layout_, jacobian(), (p_.b.array() - p_.d).matrix(), regs_);
}

Vector gradient_map(const QuadraticGame& game, const StrategyProfile& x) {
  require(x.layout() == game.layout(), "profile layout does not match game");
  return game.gradient(x.flat());
}

Vector gradient_map(const AggregativeGame& game, const StrategyProfile& x) {
  require(x.layout() == game.layout(), "profile layout does not match game");
  return game.gradient(x.flat());
}

namespace {

template <typename Game>
double residual_impl(const Game& game, const Eigen::Ref<const Vector>& x, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCategory::InvalidParameter, "residual step must be positive");
  const Vector step = x - alpha * game.gradient(x);
  return (x - prox_profile(game.regularizers(), game.layout(), step, alpha)).norm();
}

template <typename Game>
StrategyProfile oracle_impl(const Game& game, const OracleOptions& opts) {
  const GameConstants& k = game.constants();
  const double alpha = opts.alpha.value_or(k.eta / (k.lip * k.lip));
  if (!(alpha > 0.0) || !(alpha < 2.0 * k.eta / (k.lip * k.lip))) {
    std::ostringstream os;
    os << "oracle step " << alpha << " outside (0, 2 eta / L^2) = (0, "
       << 2.0 * k.eta / (k.lip * k.lip) << ")";
    throw Error(ErrorCategory::InvalidStep, os.str());
  }
  if (!(opts.tol > 0.0)) throw Error(ErrorCategory::InvalidParameter, "oracle tol must be positive");
  const double stop = opts.tol * std::min(1.0, alpha);

  // Feasible start: project the origin onto dom(r).
  Vector x = prox_profile(game.regularizers(), game.layout(), Vector::Zero(game.dim()), 1.0);
  double res = 0.0;
  for (long it = 0; it < opts.max_iter; ++it) {
    const Vector next =
        prox_profile(game.regularizers(), game.layout(), x - alpha * game.gradient(x), alpha);
    res = (x - next).norm();
    if (res <= stop) return StrategyProfile(game.layout(), x);
    x = next;
  }
  std::ostringstream os;
  os << "NE oracle did not reach tol " << opts.tol << " in " << opts.max_iter
     << " iterations; final residual " << res;
  throw Error(ErrorCategory::NonConvergence, os.str());
}

}  // namespace

double ne_residual(const QuadraticGame& game, const StrategyProfile& x, double alpha) {
  require(x.layout() == game.layout(), "profile layout does not match game");
  return residual_impl(game, x.flat(), alpha);
}

double ne_residual(const AggregativeGame& game, const StrategyProfile& x, double alpha) {
  require(x.layout() == game.layout(), "profile layout does not match game");
  return residual_impl(game, x.flat(), alpha);
}

StrategyProfile solve_ne_oracle(const QuadraticGame& game, const OracleOptions& opts) {
  return oracle_impl(game, opts);
}

StrategyProfile solve_ne_oracle(const AggregativeGame& game, const OracleOptions& opts) {
  return oracle_impl(game, opts);
}

}  // namespace vsnash
