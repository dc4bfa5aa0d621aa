#include "vsnash/vs_pbr.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace vsnash {

namespace {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

void check_symmetric_blocks(const QuadraticGame& game) {
  for (Index i = 0; i < game.players(); ++i) {
    const Matrix q = game.block(i, i);
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))
      throw Error(ErrorCategory::InvalidParameter,
                  "best-response schemes need symmetric own-Hessian blocks Q_ii");
  }
}

}  // namespace

ContractionCertificate gamma_matrix(const QuadraticGame& game, double mu) {
  if (!(mu > 0.0)) throw Error(ErrorCategory::InvalidParameter, "mu must be positive");
  check_symmetric_blocks(game);
  const Index N = game.players();
  ContractionCertificate cert;
  cert.mu = mu;
  cert.zeta_min.resize(N);
  cert.zeta_max = Matrix::Zero(N, N);
  cert.gamma.resize(N, N);
  for (Index i = 0; i < N; ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(game.block(i, i), Eigen::EigenvaluesOnly);
    cert.zeta_min(i) = es.eigenvalues().minCoeff();
    for (Index j = 0; j < N; ++j)
      if (j != i) cert.zeta_max(i, j) = spectral_norm(game.block(i, j));
  }
  for (Index i = 0; i < N; ++i) {
    const double denom = mu + cert.zeta_min(i);
    if (!(denom > 0.0))
      throw Error(ErrorCategory::InvalidParameter, "mu + zeta_i,min must be positive");
    for (Index j = 0; j < N; ++j)
      cert.gamma(i, j) = (i == j ? mu : cert.zeta_max(i, j)) / denom;
  }
  cert.a = spectral_norm(cert.gamma);
  return cert;
}

double sampling_error_constant(double mu, double lip) {
  if (!(mu > 0.0) || !(lip >= 0.0))
    throw Error(ErrorCategory::InvalidParameter, "need mu > 0 and L >= 0");
  const double s = mu * mu + lip * lip;
  return mu / s / (1.0 - lip / std::sqrt(s));
}

double own_gradient_lipschitz(const QuadraticGame& game) {
  double lip = 0.0;
  for (Index i = 0; i < game.players(); ++i) lip = std::max(lip, spectral_norm(game.block(i, i)));
  return lip;
}

ResolvedPbr resolve_pbr(const QuadraticGame& game, const NoiseModel& noise, const PbrConfig& config) {
  ResolvedPbr r;
  r.config = config;
  r.cert = gamma_matrix(game, config.mu);
  if (!r.cert.valid() && !config.allow_invalid_certificate) {
    std::ostringstream os;
    os << "proximal best-response certificate fails: ||Gamma|| = " << r.cert.a << " >= 1";
    throw Error(ErrorCategory::InvalidParameter, os.str());
  }
  if (!(config.eta_br > 0.0 && config.eta_br < 1.0))
    throw Error(ErrorCategory::InvalidParameter, "eta_br must lie in (0, 1)");
  if (!(config.inner_tol > 0.0)) throw Error(ErrorCategory::InvalidParameter, "inner_tol must be positive");
  r.m_max = config.m_max.value_or(noise.player_nu(game.layout()).maxCoeff());
  r.c_r = config.c_r.value_or(sampling_error_constant(config.mu, own_gradient_lipschitz(game)));
  const double c = std::max(r.cert.a, config.eta_br);
  r.eta_tilde = config.eta_tilde.value_or(0.5 * (1.0 + c));
  // A noise-free run has M = 0; keep the schedule well defined with unit batches.
  r.schedule = r.m_max > 0.0 ? BatchSchedule::geometric_pbr(r.m_max, r.c_r, config.eta_br)
                             : BatchSchedule::constant(1);
  r.config.m_max = r.m_max;
  r.config.c_r = r.c_r;
  r.config.eta_tilde = r.eta_tilde;
  return r;
}

Vector solve_best_response(const QuadraticGame& game, Index i, const Eigen::Ref<const Vector>& y,
                           const Eigen::Ref<const Vector>& shift, double mu, double inner_tol,
                           long inner_max_iter) {
  require(i >= 0 && i < game.players(), "player index out of range");
  require(y.size() == game.dim(), "y dimension mismatch");
  const BlockLayout& layout = game.layout();
  require(shift.size() == layout.dim(i), "noise shift dimension mismatch");
  const Matrix q = game.block(i, i);
  const auto yi = layout.block(y, i);
  // Linear term: sum_{j != i} Q_ij y_j + c_i + shift.
  Vector lin = game.hessian().middleRows(layout.offset(i), layout.dim(i)) * y -
               q * yi + layout.block(game.linear(), i) + shift;

  Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
  const double m = es.eigenvalues().minCoeff() + mu;
  const double L = es.eigenvalues().maxCoeff() + mu;
  if (!(m > 0.0)) throw Error(ErrorCategory::InvalidParameter, "subproblem is not strongly convex");
  const double step = 2.0 / (m + L);
  const Regularizer& r = game.regularizers()[static_cast<std::size_t>(i)];

  Vector z = prox_apply(r, yi, step);
  double res = 0.0;
  for (long it = 0; it < inner_max_iter; ++it) {
    const Vector grad = q * z + lin + mu * (z - yi);
    Vector next = prox_apply(r, z - step * grad, step);
    res = (next - z).norm();
    z = std::move(next);
    if (res <= inner_tol) return z;
  }
  std::ostringstream os;
  os << "best-response subproblem of player " << i << " stalled at residual " << res;
  throw Error(ErrorCategory::InnerSolveFailure, os.str());
}

Vector exact_best_response(const QuadraticGame& game, Index i, const Eigen::Ref<const Vector>& y,
                           double mu, double inner_tol) {
  return solve_best_response(game, i, y, Vector::Zero(game.layout().dim(i)), mu, inner_tol);
}

Vector saa_best_response(const QuadraticGame& game, Index i, const Eigen::Ref<const Vector>& y,
                         std::uint64_t batch, double mu, const NoiseModel& noise,
                         std::uint64_t seed, std::uint64_t iteration, double inner_tol,
                         SampleCounter* counter, long inner_max_iter) {
  require(batch >= 1, "batch size must be at least 1");
  if (!(mu > 0.0)) throw Error(ErrorCategory::InvalidParameter, "mu must be positive");
  auto eng = stream_engine(seed, iteration, static_cast<std::uint64_t>(i));
  // Each sampled cost adds xi^T x_i to f_i, so the sample average shifts the
  // linear term by the batch mean of xi.
  const Vector shift = noise.batch_block_noise(game.layout(), i, batch, eng);
  Vector x = solve_best_response(game, i, y, shift, mu, inner_tol, inner_max_iter);
  if (counter) {
    counter->total_samples += batch;
    ++counter->inner_solves;
  }
  return x;
}

RunTrace run_vs_pbr(const QuadraticGame& game, const PbrConfig& config, const NoiseModel& noise,
                    const StrategyProfile& x0, const std::optional<StrategyProfile>& x_star) {
  const ResolvedPbr rp = resolve_pbr(game, noise, config);
  require(x0.layout() == game.layout(), "x0 layout does not match game");
  if (x_star) require(x_star->layout() == game.layout(), "x* layout does not match game");
  const BlockLayout& layout = game.layout();

  auto error_of = [&](const Vector& x) {
    return x_star ? (x - x_star->flat()).norm() : std::numeric_limits<double>::quiet_NaN();
  };

  RunTrace trace;
  trace.records.reserve(config.max_iter);
  SampleCounter counter;
  Vector y = x0.flat();
  for (std::uint64_t k = 0; k < config.max_iter; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.batch = rp.schedule.size(k);
    rec.counters = counter;
    rec.error = error_of(y);
    trace.records.push_back(rec);

    Vector x(y.size());
    for (Index i = 0; i < game.players(); ++i)
      layout.block(x, i) = saa_best_response(game, i, y, rec.batch, config.mu, noise, config.seed,
                                             k, config.inner_tol, &counter, config.inner_max_iter);
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "non-finite iterate at iteration " << k + 1;
      throw Error(ErrorCategory::Divergence, os.str());
    }
    y = std::move(x);
  }
  trace.final_profile = StrategyProfile(layout, y);
  trace.final_counters = counter;
  trace.final_error = error_of(y);
  return trace;
}

double PbrEnvelope::operator()(double k) const { return scale * std::pow(eta_tilde, k); }

PbrEnvelope pbr_envelope(double a, double eta_br, double eta_tilde, Index players, double c_start) {
  PbrEnvelope env;
  env.c = std::max(a, eta_br);
  env.eta_tilde = eta_tilde;
  if (!(eta_tilde > env.c && eta_tilde < 1.0)) {
    std::ostringstream os;
    os << "eta_tilde must lie in (max(a, eta_br), 1) = (" << env.c << ", 1), got " << eta_tilde;
    throw Error(ErrorCategory::InvalidParameter, os.str());
  }
  env.d = 1.0 / (std::exp(1.0) * std::log(eta_tilde / env.c));
  env.scale = std::sqrt(static_cast<double>(players)) * (c_start + env.d);
  return env;
}

PbrComplexity pbr_complexity(const PbrConfig& config, double a, double eps, Index players,
                             double c_start) {
  if (!(a < 1.0)) throw Error(ErrorCategory::InvalidParameter, "complexity needs ||Gamma|| < 1");
  if (!(eps > 0.0)) throw Error(ErrorCategory::InvalidParameter, "eps must be positive");
  if (!(config.eta_br > 0.0 && config.eta_br < 1.0))
    throw Error(ErrorCategory::InvalidParameter, "eta_br must lie in (0, 1)");
  if (!config.m_max || !config.c_r)
    throw Error(ErrorCategory::InvalidParameter, "complexity needs M_max and C_r");
  const double eta_tilde = config.eta_tilde.value_or(0.5 * (1.0 + std::max(a, config.eta_br)));
  PbrComplexity out;
  out.envelope = pbr_envelope(a, config.eta_br, eta_tilde, players, c_start);
  const double K = std::log(out.envelope.scale / eps) / std::log(1.0 / eta_tilde);
  out.K = K > 0.0 ? static_cast<std::uint64_t>(std::ceil(K - 1e-12)) : 0;
  const BatchSchedule s = BatchSchedule::geometric_pbr(*config.m_max, *config.c_r, config.eta_br);
  out.samples = static_cast<std::uint64_t>(players) * s.cumulative(out.K);
  out.samples_order = std::pow(std::sqrt(static_cast<double>(players)) / eps,
                               2.0 * std::log(1.0 / config.eta_br) / std::log(1.0 / eta_tilde));
  return out;
}

}  // namespace vsnash
