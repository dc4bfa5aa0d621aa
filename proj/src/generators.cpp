#include "vsnash/generators.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <random>

namespace vsnash {

namespace {

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& eng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n01(eng);
  return m;
}

Regularizer fit_regularizer(const Regularizer& r, Index dim) {
  if (const auto* b = r.as_box()) {
    require(b->lo.size() == 1 || b->lo.size() == dim,
            "generator box must be scalar or match the player dimension");
    if (b->lo.size() == dim) return r;
    return Regularizer::box(dim, b->lo(0), b->hi(0));
  }
  return r;
}

}  // namespace

QuadraticGame generate_quadratic_game(Index players, Index dim, double coupling,
                                      std::uint64_t seed, const QuadraticGameOptions& opts) {
  if (players < 1 || dim < 1)
    throw Error(ErrorCategory::InvalidParameter, "players and dim must be positive");
  if (!(coupling >= 0.0)) throw Error(ErrorCategory::InvalidParameter, "coupling must be >= 0");
  if (!(opts.own_eig_lo > 0.0 && opts.own_eig_hi >= opts.own_eig_lo))
    throw Error(ErrorCategory::InvalidParameter, "own eigenvalue range must be positive");

  const BlockLayout layout(std::vector<Index>(static_cast<std::size_t>(players), dim));
  std::vector<Regularizer> regs(static_cast<std::size_t>(players),
                                fit_regularizer(opts.regularizer, dim));
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> eig(opts.own_eig_lo, opts.own_eig_hi);
  std::normal_distribution<double> n01(0.0, 1.0);

  for (int attempt = 0; attempt < opts.max_tries; ++attempt) {
    const Index n = layout.total();
    Matrix H = Matrix::Zero(n, n);
    for (Index i = 0; i < players; ++i) {
      const Matrix U = Eigen::HouseholderQR<Matrix>(gaussian_matrix(dim, dim, eng)).householderQ();
      Vector lam(dim);
      for (Index j = 0; j < dim; ++j) lam(j) = eig(eng);
      const Matrix q = U * lam.asDiagonal() * U.transpose();
      H.block(layout.offset(i), layout.offset(i), dim, dim) = 0.5 * (q + q.transpose());
      for (Index j = 0; j < players; ++j) {
        if (j == i) continue;
        Matrix g = gaussian_matrix(dim, dim, eng);
        const double s = Eigen::JacobiSVD<Matrix>(g).singularValues()(0);
        H.block(layout.offset(i), layout.offset(j), dim, dim) = coupling / s * g;
      }
    }
    Vector c(n);
    for (Index j = 0; j < n; ++j) c(j) = opts.linear_scale * n01(eng);
    try {
      return QuadraticGame(layout, std::move(H), std::move(c), regs);
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::NotStronglyMonotone) throw;
    }
  }
  throw Error(ErrorCategory::InvalidParameter,
              "could not draw a strongly monotone game; lower the coupling");
}

AggregativeGame generate_cournot_game(Index players, Vector a, Vector b, double d, double c_price,
                                      double lo, double hi, std::uint64_t seed,
                                      const CournotRanges& ranges) {
  if (players < 1) throw Error(ErrorCategory::InvalidParameter, "players must be positive");
  std::mt19937_64 eng(seed);
  if (a.size() == 0) {
    std::uniform_real_distribution<double> u(ranges.a_lo, ranges.a_hi);
    a.resize(players);
    for (Index i = 0; i < players; ++i) a(i) = u(eng);
  }
  if (b.size() == 0) {
    std::uniform_real_distribution<double> u(ranges.b_lo, ranges.b_hi);
    b.resize(players);
    for (Index i = 0; i < players; ++i) b(i) = u(eng);
  }
  require(a.size() == players && b.size() == players, "cost vectors need one entry per player");
  if (((a.array() + c_price) <= 0.0).any())
    throw Error(ErrorCategory::NotStronglyMonotone, "Cournot game needs a_i + c_price > 0");
  CournotParams p;
  p.a = std::move(a);
  p.b = std::move(b);
  p.d = d;
  p.c_price = c_price;
  p.lo = Vector::Constant(players, lo);
  p.hi = Vector::Constant(players, hi);
  return AggregativeGame(std::move(p));
}

}  // namespace vsnash
