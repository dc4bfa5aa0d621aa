#pragma once

#include "vsnash/game.hpp"
#include "vsnash/oracle.hpp"
#include "vsnash/trace.hpp"

#include <cstdint>
#include <optional>

namespace vsnash {

/// Relative gap below which two rates are treated as equal and the
/// equal-rate branch of the bounds is used.
inline constexpr double kBranchTol = 1e-12;

/// q = 1 - 2 alpha eta + alpha^2 L^2. Throws InvalidStep unless q < 1.
double contraction_factor_q(double eta, double lip, double alpha);

/// Constants of the mean-squared-error envelope of the gradient-response scheme.
struct RateConstants {
  double q = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  double nu = 0.0;
  double c_start = 0.0;     // E||x_0 - x*||^2 <= C
  double c_rho_q = 0.0;     // C + alpha^2 nu^2 / (1 - min(rho/q, q/rho)); unused on the tie
  double rho_tilde = 0.0;   // only on the tie
  double d_tilde = 0.0;     // C + alpha^2 nu^2 / ln((rho_tilde/rho)^e); only on the tie
  bool tie = false;         // |rho - q| <= kBranchTol

  /// Bound on E||x_k - x*||^2.
  double envelope(double k) const;
  /// Rate of the envelope: max(rho, q), or rho_tilde on the tie.
  double rate() const;
};

RateConstants rate_constants(double q, double rho, double alpha, double nu, double c_start,
                             std::optional<double> rho_tilde = {});

/// Number of proximal evaluations that guarantees an eps-NE (three branches in
/// rho vs q). Clamped at zero when eps exceeds the envelope constant.
double complexity_K(const RateConstants& rc, double eps);

/// Sampled-gradient bound matching complexity_K.
double complexity_M(const RateConstants& rc, double eps);

struct StepAndRatio {
  double alpha;
  double rho;
};

/// alpha = eta / L^2, rho = 1 - 1 / (2 kappa^2); then q = 1 - 1/kappa^2 < rho.
StepAndRatio auto_step_params(double eta, double lip);

struct PgrConfig {
  double alpha = 0.0;
  double rho = 0.5;
  std::uint64_t max_iter = 50;
  std::optional<double> target_eps;   // run ceil(K(eps)) iterations instead of max_iter
  std::optional<double> c_start;      // initial error bound; default ||x_0 - x*||^2
  std::optional<BatchSchedule> schedule;  // ablation override of ceil(rho^-(k+1))
  std::uint64_t seed = 0;
};

/// x_{k+1} = prox_{alpha r}[x_k - alpha (G(x_k) + w_bar_k)] with N_k samples in
/// w_bar_k. Records squared errors when x_star is given.
RunTrace run_vs_pgr(const QuadraticGame& game, const PgrConfig& config, const NoiseModel& noise,
                    const StrategyProfile& x0,
                    const std::optional<StrategyProfile>& x_star = std::nullopt);
RunTrace run_vs_pgr(const AggregativeGame& game, const PgrConfig& config, const NoiseModel& noise,
                    const StrategyProfile& x0,
                    const std::optional<StrategyProfile>& x_star = std::nullopt);

/// Validates config against the game and returns its rate constants.
RateConstants pgr_rate_constants(const GameConstants& k, const PgrConfig& config, double nu,
                                 double c_start);

}  // namespace vsnash
