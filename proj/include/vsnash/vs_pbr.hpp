#pragma once

#include "vsnash/game.hpp"
#include "vsnash/oracle.hpp"
#include "vsnash/trace.hpp"

#include <cstdint>
#include <optional>

namespace vsnash {

/// Hessian-bound matrix certifying that the proximal best-response map is a
/// contraction: diagonal mu / (mu + zeta_i), off-diagonal zeta_ij / (mu + zeta_i).
struct ContractionCertificate {
  double mu = 0.0;
  Matrix gamma;
  double a = 0.0;     // ||Gamma||_2
  Vector zeta_min;    // lambda_min(Q_ii)
  Matrix zeta_max;    // ||Q_ij||_2 off the diagonal, 0 on it

  bool valid() const { return a < 1.0; }
};

/// Exact for quadratic games since their Hessians are constant. Requires
/// symmetric diagonal blocks Q_ii.
ContractionCertificate gamma_matrix(const QuadraticGame& game, double mu);

/// C_r = mu / (mu^2 + L^2) / (1 - L / sqrt(mu^2 + L^2)).
double sampling_error_constant(double mu, double lip);

/// max_i ||Q_ii||_2, the uniform Lipschitz constant of each player's own gradient.
double own_gradient_lipschitz(const QuadraticGame& game);

struct PbrConfig {
  double mu = 1.0;
  double eta_br = 0.5;                 // batch decay factor in (0, 1)
  std::optional<double> eta_tilde;     // defaults to (1 + max(a, eta_br)) / 2
  std::optional<double> m_max;         // defaults to max_i nu_i
  std::optional<double> c_r;           // defaults to sampling_error_constant(mu, L)
  double inner_tol = 1e-12;
  long inner_max_iter = 1'000'000;
  std::uint64_t max_iter = 25;
  std::uint64_t seed = 0;
  bool allow_invalid_certificate = false;
};

/// Config with every optional resolved against a game and noise model.
struct ResolvedPbr {
  PbrConfig config;
  ContractionCertificate cert;
  double m_max = 0.0;
  double c_r = 0.0;
  double eta_tilde = 0.0;
  BatchSchedule schedule = BatchSchedule::constant(1);
};

ResolvedPbr resolve_pbr(const QuadraticGame& game, const NoiseModel& noise, const PbrConfig& config);

/// Minimizer of f_i(., y_{-i}) + w^T x_i + r_i(x_i) + mu/2 ||x_i - y_i||^2 by
/// deterministic proximal gradient to fixed-point residual inner_tol.
Vector solve_best_response(const QuadraticGame& game, Index i, const Eigen::Ref<const Vector>& y,
                           const Eigen::Ref<const Vector>& shift, double mu, double inner_tol,
                           long inner_max_iter = 1'000'000);

/// Noise-free proximal best response x_hat_i(y).
Vector exact_best_response(const QuadraticGame& game, Index i, const Eigen::Ref<const Vector>& y,
                           double mu, double inner_tol = 1e-12);

/// Sample-average best response with `batch` draws from stream (seed, iteration, i).
/// Adds batch to total_samples and 1 to inner_solves.
Vector saa_best_response(const QuadraticGame& game, Index i, const Eigen::Ref<const Vector>& y,
                         std::uint64_t batch, double mu, const NoiseModel& noise,
                         std::uint64_t seed, std::uint64_t iteration, double inner_tol,
                         SampleCounter* counter = nullptr, long inner_max_iter = 1'000'000);

/// Every player solves its sample-average proximal BR at y_k with a shared
/// batch N_k, then y_{k+1} = x_{k+1}. Records ||x_k - x*|| when x_star is given.
RunTrace run_vs_pbr(const QuadraticGame& game, const PbrConfig& config, const NoiseModel& noise,
                    const StrategyProfile& x0,
                    const std::optional<StrategyProfile>& x_star = std::nullopt);

struct PbrEnvelope {
  double c = 0.0;          // max(a, eta_br)
  double eta_tilde = 0.0;
  double d = 0.0;          // 1 / ln((eta_tilde / c)^e)
  double scale = 0.0;      // sqrt(N) (C + D)

  double operator()(double k) const;
};

PbrEnvelope pbr_envelope(double a, double eta_br, double eta_tilde, Index players, double c_start);

struct PbrComplexity {
  std::uint64_t K = 0;
  std::uint64_t samples = 0;   // sum_{k<K} N * N_k
  double samples_order = 0.0;  // (sqrt(N)/eps)^(2 ln(1/eta_br) / ln(1/eta_tilde))
  PbrEnvelope envelope;
};

/// `config` must carry eta_br, m_max, c_r (eta_tilde defaults as in resolve_pbr).
PbrComplexity pbr_complexity(const PbrConfig& config, double a, double eps, Index players,
                             double c_start);

}  // namespace vsnash
