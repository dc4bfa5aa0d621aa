#include "vsnash/vs_pgr.hpp"

#include <cmath>
#include <sstream>

namespace vsnash {

double contraction_factor_q(double eta, double lip, double alpha) {
  if (!(eta > 0.0) || !(lip > 0.0) || !(alpha > 0.0))
    throw Error(ErrorCategory::InvalidParameter, "eta, L and alpha must be positive");
  const double q = 1.0 - 2.0 * alpha * eta + alpha * alpha * lip * lip;
  if (!(q < 1.0)) {
    std::ostringstream os;
    os << "step alpha = " << alpha << " gives q = " << q << " >= 1; need alpha < 2 eta / L^2 = "
       << 2.0 * eta / (lip * lip);
    throw Error(ErrorCategory::InvalidStep, os.str());
  }
  return std::max(q, 0.0);
}

RateConstants rate_constants(double q, double rho, double alpha, double nu, double c_start,
                             std::optional<double> rho_tilde) {
  if (!(q >= 0.0 && q < 1.0)) throw Error(ErrorCategory::InvalidParameter, "q must lie in [0, 1)");
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCategory::InvalidParameter, "rho must lie in (0, 1)");
  if (!(c_start >= 0.0)) throw Error(ErrorCategory::InvalidParameter, "C must be >= 0");
  RateConstants rc;
  rc.q = q;
  rc.rho = rho;
  rc.alpha = alpha;
  rc.nu = nu;
  rc.c_start = c_start;
  const double noise = alpha * alpha * nu * nu;
  rc.tie = std::abs(rho - q) <= kBranchTol;
  if (rc.tie) {
    rc.rho_tilde = rho_tilde.value_or(0.5 * (1.0 + q));
    if (!(rc.rho_tilde > rho && rc.rho_tilde < 1.0))
      throw Error(ErrorCategory::InvalidParameter, "rho_tilde must lie in (rho, 1)");
    rc.d_tilde = c_start + noise / (std::exp(1.0) * std::log(rc.rho_tilde / rho));
  } else {
    const double ratio = q < rho ? q / rho : rho / q;
    rc.c_rho_q = c_start + noise / (1.0 - ratio);
  }
  return rc;
}

double RateConstants::envelope(double k) const {
  if (tie) return d_tilde * std::pow(rho_tilde, k);
  return c_rho_q * std::pow(std::max(rho, q), k);
}

double RateConstants::rate() const { return tie ? rho_tilde : std::max(rho, q); }

namespace {
void check_eps(double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCategory::InvalidParameter, "eps must be positive");
}
}  // namespace

double complexity_K(const RateConstants& rc, double eps) {
  check_eps(eps);
  double K;
  if (rc.tie) {
    K = std::log(rc.d_tilde / eps) / std::log(1.0 / rc.rho_tilde);
  } else if (rc.rho < rc.q) {
    K = std::log(rc.c_rho_q / eps) / std::log(1.0 / rc.q);
  } else {
    K = std::log(rc.c_rho_q / eps) / std::log(1.0 / rc.rho);
  }
  return std::max(K, 0.0);
}

double complexity_M(const RateConstants& rc, double eps) {
  check_eps(eps);
  const double lead = 1.0 / (rc.rho * std::log(1.0 / rc.rho));
  const double K = complexity_K(rc, eps);
  if (rc.tie) {
    const double expo = std::log(1.0 / rc.rho) / std::log(1.0 / rc.rho_tilde);
    return lead * std::pow(rc.d_tilde / eps, expo) + K;
  }
  if (rc.rho < rc.q) {
    const double expo = std::log(1.0 / rc.rho) / std::log(1.0 / rc.q);
    return lead * std::pow(rc.c_rho_q / eps, expo) + K;
  }
  return lead * (rc.c_rho_q / eps) + K;
}

StepAndRatio auto_step_params(double eta, double lip) {
  if (!(eta > 0.0) || !(lip > 0.0))
    throw Error(ErrorCategory::InvalidParameter, "eta and L must be positive");
  const double kappa = lip / eta;
  return {eta / (lip * lip), 1.0 - 1.0 / (2.0 * kappa * kappa)};
}

RateConstants pgr_rate_constants(const GameConstants& k, const PgrConfig& config, double nu,
                                 double c_start) {
  const double q = contraction_factor_q(k.eta, k.lip, config.alpha);
  return rate_constants(q, config.rho, config.alpha, nu, c_start);
}

namespace {

template <typename Game>
RunTrace pgr_impl(const Game& game, const PgrConfig& config, const NoiseModel& noise,
                  const StrategyProfile& x0, const std::optional<StrategyProfile>& x_star) {
  const GameConstants& gk = game.constants();
  const double alpha = config.alpha;
  if (!(alpha > 0.0 && alpha < 2.0 * gk.eta / (gk.lip * gk.lip))) {
    std::ostringstream os;
    os << "VS-PGR requires 0 < alpha < 2 eta / L^2 = " << 2.0 * gk.eta / (gk.lip * gk.lip)
       << ", got alpha = " << alpha;
    throw Error(ErrorCategory::InvalidStep, os.str());
  }
  require(x0.layout() == game.layout(), "x0 layout does not match game");
  if (x_star) require(x_star->layout() == game.layout(), "x* layout does not match game");
  for (Index i = 0; i < game.players(); ++i)
    if (!game.regularizers()[static_cast<std::size_t>(i)].contains(x0.block(i)))
      throw Error(ErrorCategory::InvalidParameter, "x0 must lie in dom(r)");

  const BatchSchedule schedule = config.schedule.value_or(BatchSchedule::geometric_pgr(config.rho));

  std::uint64_t iterations = config.max_iter;
  if (config.target_eps) {
    double c_start = 0.0;
    if (config.c_start) c_start = *config.c_start;
    else if (x_star) c_start = (x0.flat() - x_star->flat()).squaredNorm();
    else throw Error(ErrorCategory::InvalidParameter, "target_eps needs x* or an explicit C");
    const RateConstants rc =
        pgr_rate_constants(gk, config, noise.total_nu(game.layout()), c_start);
    iterations = static_cast<std::uint64_t>(std::ceil(complexity_K(rc, *config.target_eps)));
  }

  auto error_of = [&](const Vector& x) {
    return x_star ? (x - x_star->flat()).squaredNorm() : std::numeric_limits<double>::quiet_NaN();
  };

  RunTrace trace;
  trace.records.reserve(iterations);
  SampleCounter counter;
  Vector x = x0.flat();
  for (std::uint64_t k = 0; k < iterations; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.batch = schedule.size(k);
    rec.counters = counter;
    rec.error = error_of(x);
    trace.records.push_back(rec);

    const Vector g =
        sample_batch_gradient(game, x, rec.batch, noise, config.seed, k, &counter);
    x = prox_profile(game.regularizers(), game.layout(), x - alpha * g, alpha, &counter);
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "non-finite iterate at iteration " << k + 1;
      throw Error(ErrorCategory::Divergence, os.str());
    }
  }
  trace.final_profile = StrategyProfile(game.layout(), x);
  trace.final_counters = counter;
  trace.final_error = error_of(x);
  return trace;
}

}  // namespace

RunTrace run_vs_pgr(const QuadraticGame& game, const PgrConfig& config, const NoiseModel& noise,
                    const StrategyProfile& x0, const std::optional<StrategyProfile>& x_star) {
  return pgr_impl(game, config, noise, x0, x_star);
}

RunTrace run_vs_pgr(const AggregativeGame& game, const PgrConfig& config, const NoiseModel& noise,
                    const StrategyProfile& x0, const std::optional<StrategyProfile>& x_star) {
  return pgr_impl(game, config, noise, x0, x_star);
}

}  // namespace vsnash
