#pragma once

#include "vsnash/consensus.hpp"
#include "vsnash/game.hpp"
#include "vsnash/oracle.hpp"
#include "vsnash/trace.hpp"

#include <cstdint>
#include <optional>

namespace vsnash {

struct DistConfig {
  double alpha = 0.0;  // must lie in (0, eta / L^2)
  // Mixing rate driving the batch schedule and the rate constants. Defaults to
  // the graph's beta; any value in [beta_graph, 1) keeps the certificate valid
  // and is required when the graph averages exactly in one round (beta = 0).
  std::optional<double> beta;
  std::uint64_t max_iter = 40;
  std::uint64_t seed = 0;
  std::optional<double> c_start;
};

/// Per-player strategy and aggregate-average estimates.
struct DistState {
  Vector x;      // x_{i,k}
  Vector v;      // v_{i,k}
  Vector v_hat;  // v_hat_{i,k} after the consensus rounds of iteration k
};

/// tau_k = k + 1.
inline std::uint64_t consensus_rounds(std::uint64_t k) { return k + 1; }

/// Total rounds after K iterations: K (K + 1) / 2.
inline std::uint64_t cumulative_rounds(std::uint64_t K) { return K * (K + 1) / 2; }

struct DistRateConstants {
  double alpha = 0.0;
  double varrho = 0.0;  // 1 - 2 alpha eta + 2 alpha^2 L^2
  double beta = 0.0;
  double theta = 1.0;
  double m_compact = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  Vector lip_players;
  Vector nu_players;
  double c_start = 0.0;
  bool tie = false;           // |beta - varrho^2| <= kBranchTol
  double c_tilde = 0.0;       // C + C3 / (1 - min(varrho/sqrt(beta), sqrt(beta)/varrho))
  double varrho_tilde = 0.0;  // only on the tie
  double d_tilde = 0.0;       // C + C3 / ln((varrho_tilde/varrho)^e); only on the tie

  /// Bound on E||x_k - x*||^2.
  double envelope(double k) const;
  double rate() const;
};

/// Builds the rate constants from the game, graph and config. beta is the
/// effective mixing rate (config.beta or the graph's).
DistRateConstants dist_rate_constants(const AggregativeGame& game, const CommGraph& graph,
                                      const DistConfig& config, const NoiseModel& noise,
                                      double c_start,
                                      std::optional<double> varrho_tilde = std::nullopt);

/// Same, from explicit ingredients.
DistRateConstants dist_rate_constants(double alpha, double eta, double lip, double beta,
                                      double theta, double m_compact, const Vector& lip_players,
                                      const Vector& nu_players, double c_start,
                                      std::optional<double> varrho_tilde = std::nullopt);

struct DistComplexity {
  double K = 0.0;         // proximal evaluations
  double comm = 0.0;      // (ceil(K) + 1)(ceil(K) + 2) / 2 rounds
  double samples = 0.0;   // sampled-gradient bound
};

DistComplexity dist_complexity(const DistRateConstants& rc, double eps);

/// Effective beta for a run; validates it against the graph.
double effective_beta(const CommGraph& graph, const DistConfig& config);

/// Distributed VS-PGR with consensus-based aggregate tracking. Records
/// squared errors, consensus errors max_i |v_hat_i - xbar/N| and the tracking
/// gap |mean(v) - mean(x)| per iteration.
RunTrace run_dist_vs_pgr(const AggregativeGame& game, const CommGraph& graph,
                         const DistConfig& config, const NoiseModel& noise,
                         const StrategyProfile& x0,
                         const std::optional<StrategyProfile>& x_star = std::nullopt,
                         DistState* final_state = nullptr);

}  // namespace vsnash
