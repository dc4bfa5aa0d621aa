#include "vsnash/dist_vs_pgr.hpp"

#include "vsnash/vs_pgr.hpp"

#include <cmath>
#include <sstream>

namespace vsnash {

DistRateConstants dist_rate_constants(double alpha, double eta, double lip, double beta,
                                      double theta, double m_compact, const Vector& lip_players,
                                      const Vector& nu_players, double c_start,
                                      std::optional<double> varrho_tilde) {
  if (!(beta > 0.0 && beta < 1.0))
    throw Error(ErrorCategory::InvalidParameter, "beta must lie in (0, 1) for the rate constants");
  if (!(alpha > 0.0 && alpha < eta / (lip * lip))) {
    std::ostringstream os;
    os << "distributed scheme requires 0 < alpha < eta / L^2 = " << eta / (lip * lip);
    throw Error(ErrorCategory::InvalidStep, os.str());
  }
  require(lip_players.size() == nu_players.size(), "per-player constants must align");
  DistRateConstants rc;
  rc.alpha = alpha;
  rc.varrho = 1.0 - 2.0 * alpha * eta + 2.0 * alpha * alpha * lip * lip;
  rc.beta = beta;
  rc.theta = theta;
  rc.m_compact = m_compact;
  rc.lip_players = lip_players;
  rc.nu_players = nu_players;
  rc.c_start = c_start;

  const double e = std::exp(1.0);
  const double N = static_cast<double>(lip_players.size());
  const double M = m_compact;
  const double sb = std::sqrt(beta);
  rc.c1 = M * theta * (1.0 + 2.0 * e * std::sqrt(1.0 / std::log(std::pow(beta, -0.5))));
  rc.c2 = 4.0 * M * theta / std::log(1.0 / beta);
  rc.c3 = alpha * alpha * nu_players.squaredNorm() +
          4.0 * alpha * M * N * (rc.c1 * sb + rc.c2) * lip_players.sum() +
          4.0 * alpha * alpha * N * N *
              (rc.c1 * rc.c1 * std::pow(beta, 1.5) + rc.c2 * rc.c2 * sb) *
              lip_players.squaredNorm();

  rc.tie = std::abs(beta - rc.varrho * rc.varrho) <= kBranchTol;
  if (rc.tie) {
    rc.varrho_tilde = varrho_tilde.value_or(0.5 * (1.0 + rc.varrho));
    if (!(rc.varrho_tilde > rc.varrho && rc.varrho_tilde < 1.0))
      throw Error(ErrorCategory::InvalidParameter, "varrho_tilde must lie in (varrho, 1)");
    rc.d_tilde = c_start + rc.c3 / (e * std::log(rc.varrho_tilde / rc.varrho));
  } else {
    const double ratio = std::min(rc.varrho / sb, sb / rc.varrho);
    rc.c_tilde = c_start + rc.c3 / (1.0 - ratio);
  }
  return rc;
}

double effective_beta(const CommGraph& graph, const DistConfig& config) {
  const double graph_beta = mixing_params(graph).beta;
  if (!config.beta) {
    if (graph_beta <= 0.0)
      throw Error(ErrorCategory::InvalidParameter,
                  "graph averages in one round (beta = 0); set an explicit schedule beta in (0, 1)");
    return graph_beta;
  }
  const double b = *config.beta;
  if (!(b > 0.0 && b < 1.0)) throw Error(ErrorCategory::InvalidParameter, "beta must lie in (0, 1)");
  if (b < graph_beta - 1e-12) {
    std::ostringstream os;
    os << "configured beta " << b << " is below the graph's mixing rate " << graph_beta;
    throw Error(ErrorCategory::InvalidParameter, os.str());
  }
  return b;
}

DistRateConstants dist_rate_constants(const AggregativeGame& game, const CommGraph& graph,
                                      const DistConfig& config, const NoiseModel& noise,
                                      double c_start, std::optional<double> varrho_tilde) {
  require(graph.nodes() == game.players(), "graph must have one node per player");
  const double beta = effective_beta(graph, config);
  const GameConstants& k = game.constants();
  return dist_rate_constants(config.alpha, k.eta, k.lip, beta, mixing_params(graph).theta,
                             game.m_compact(), game.aggregate_lipschitz(),
                             noise.player_nu(game.layout()), c_start, varrho_tilde);
}

double DistRateConstants::envelope(double k) const {
  if (tie) return d_tilde * std::pow(varrho_tilde, k);
  return c_tilde * std::pow(std::max(varrho, std::sqrt(beta)), k);
}

double DistRateConstants::rate() const {
  return tie ? varrho_tilde : std::max(varrho, std::sqrt(beta));
}

DistComplexity dist_complexity(const DistRateConstants& rc, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCategory::InvalidParameter, "eps must be positive");
  const double sb = std::sqrt(rc.beta);
  const double lead = 1.0 / (sb * std::log(1.0 / sb));
  DistComplexity out;
  double base, expo, K;
  if (rc.tie) {
    base = rc.d_tilde / eps;
    K = std::log(base) / std::log(1.0 / rc.varrho_tilde);
    expo = std::log(1.0 / rc.varrho) / std::log(1.0 / rc.varrho_tilde);
  } else if (rc.beta < rc.varrho * rc.varrho) {
    base = rc.c_tilde / eps;
    K = std::log(base) / std::log(1.0 / rc.varrho);
    expo = std::log(1.0 / sb) / std::log(1.0 / rc.varrho);
  } else {
    base = rc.c_tilde / eps;
    K = std::log(base) / std::log(1.0 / sb);
    expo = 1.0;
  }
  out.K = std::max(K, 0.0);
  const double Kc = std::ceil(out.K - 1e-12);
  out.comm = (Kc + 1.0) * (Kc + 2.0) / 2.0;
  out.samples = lead * std::pow(base, expo) + out.K;
  return out;
}

RunTrace run_dist_vs_pgr(const AggregativeGame& game, const CommGraph& graph,
                         const DistConfig& config, const NoiseModel& noise,
                         const StrategyProfile& x0, const std::optional<StrategyProfile>& x_star,
                         DistState* final_state) {
  const Index N = game.players();
  require(graph.nodes() == N, "graph must have one node per player");
  require(x0.layout() == game.layout(), "x0 layout does not match game");
  if (x_star) require(x_star->layout() == game.layout(), "x* layout does not match game");
  const GameConstants& gk = game.constants();
  const double alpha = config.alpha;
  if (!(alpha > 0.0 && alpha < gk.eta / (gk.lip * gk.lip))) {
    std::ostringstream os;
    os << "distributed scheme requires 0 < alpha < eta / L^2 = " << gk.eta / (gk.lip * gk.lip)
       << ", got alpha = " << alpha;
    throw Error(ErrorCategory::InvalidStep, os.str());
  }
  for (Index i = 0; i < N; ++i)
    if (!game.regularizers()[static_cast<std::size_t>(i)].contains(x0.block(i)))
      throw Error(ErrorCategory::InvalidParameter, "x0 must lie in the players' boxes");
  const BatchSchedule schedule = BatchSchedule::geometric_dist(effective_beta(graph, config));
  const double n_players = static_cast<double>(N);

  auto error_of = [&](const Vector& x) {
    return x_star ? (x - x_star->flat()).squaredNorm() : std::numeric_limits<double>::quiet_NaN();
  };

  DistState st;
  st.x = x0.flat();
  st.v = st.x;
  st.v_hat = st.v;

  RunTrace trace;
  trace.records.reserve(config.max_iter);
  SampleCounter counter;
  for (std::uint64_t k = 0; k < config.max_iter; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.batch = schedule.size(k);
    rec.tau = consensus_rounds(k);
    rec.counters = counter;
    rec.error = error_of(st.x);
    rec.tracking_gap = std::abs(st.v.mean() - st.x.mean());

    st.v_hat = consensus_apply(graph, st.v, rec.tau, &counter);
    rec.consensus_error = (st.v_hat.array() - st.x.sum() / n_players).abs().maxCoeff();
    trace.records.push_back(rec);

    Vector step(N);
    for (Index i = 0; i < N; ++i) {
      double g = game.player_gradient(i, st.x(i), n_players * st.v_hat(i));
      if (!noise.is_zero()) {
        auto eng = stream_engine(config.seed, k, static_cast<std::uint64_t>(i));
        g += noise.batch_block_noise(game.layout(), i, rec.batch, eng)(0);
      }
      step(i) = st.x(i) - alpha * g;
    }
    counter.total_samples += static_cast<std::uint64_t>(N) * rec.batch;
    const Vector x_next = prox_profile(game.regularizers(), game.layout(), step, alpha, &counter);
    if (!x_next.allFinite()) {
      std::ostringstream os;
      os << "non-finite iterate at iteration " << k + 1;
      throw Error(ErrorCategory::Divergence, os.str());
    }
    st.v += x_next - st.x;
    st.x = x_next;
  }
  trace.final_profile = StrategyProfile(game.layout(), st.x);
  trace.final_counters = counter;
  trace.final_error = error_of(st.x);
  if (final_state) *final_state = st;
  return trace;
}

}  // namespace vsnash
