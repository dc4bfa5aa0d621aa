#include "vsnash/generators.hpp"
#include "vsnash/vs_pgr.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vsnash;

namespace {

QuadraticGame reference_game() {
  Matrix H(2, 2);
  H << 2, 1, 1, 2;
  Vector c(2);
  c << -1, -1;
  return QuadraticGame(BlockLayout::scalar(2), H, c);
}

ErrorCategory category_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected an Error");
  return ErrorCategory::Contract;
}

}  // namespace

TEST_CASE("contraction_factor_q examples") {
  CHECK(contraction_factor_q(1, 2, 0.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(contraction_factor_q(2, 2, 0.5) == doctest::Approx(0.0));
  CHECK(category_of([] { contraction_factor_q(1, 2, 0.6); }) == ErrorCategory::InvalidStep);
}

TEST_CASE("complexity_K examples") {
  const RateConstants a = rate_constants(0.75, 0.5, 0.25, 1.0, 1.0);
  CHECK(a.c_rho_q == doctest::Approx(1.1875).epsilon(1e-14));
  const double expected = std::log(118.75) / std::log(4.0 / 3.0);
  CHECK(complexity_K(a, 0.01) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(complexity_K(a, 0.01) == doctest::Approx(16.61).epsilon(1e-3));
  CHECK(complexity_K(a, a.c_rho_q) == 0.0);

  const RateConstants b = rate_constants(0.5, 0.75, 0.25, 1.0, 1.0);
  CHECK(b.c_rho_q == doctest::Approx(1.1875).epsilon(1e-14));
  CHECK(complexity_K(b, 0.01) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("complexity_M examples") {
  const RateConstants b = rate_constants(0.5, 0.75, 0.25, 1.0, 1.0);
  const double K = std::log(118.75) / std::log(4.0 / 3.0);
  const double expected = 1.1875 / (0.75 * std::log(4.0 / 3.0) * 0.01) + K;
  CHECK(complexity_M(b, 0.01) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(complexity_M(b, 0.01) == doctest::Approx(566.9).epsilon(1e-3));
  CHECK(complexity_M(b, b.c_rho_q) ==
        doctest::Approx(1.0 / (0.75 * std::log(1.0 / 0.75))).epsilon(1e-12));

  // rho < q: exponent ln(1/rho) / ln(1/q).
  const RateConstants a = rate_constants(0.75, 0.5, 0.25, 1.0, 1.0);
  const double ea = 1.0 / (0.5 * std::log(2.0)) *
                        std::pow(118.75, std::log(2.0) / std::log(4.0 / 3.0)) + K;
  CHECK(complexity_M(a, 0.01) == doctest::Approx(ea).epsilon(1e-12));
}

TEST_CASE("equal-rate branch") {
  const RateConstants t = rate_constants(0.6, 0.6, 0.2, 1.0, 1.0);
  CHECK(t.tie);
  CHECK(t.rho_tilde == doctest::Approx(0.8));
  const double d = 1.0 + 0.04 / (std::exp(1.0) * std::log(0.8 / 0.6));
  CHECK(t.d_tilde == doctest::Approx(d).epsilon(1e-14));
  CHECK(complexity_K(t, 0.01) == doctest::Approx(std::log(d / 0.01) / std::log(1.0 / 0.8)).epsilon(1e-12));
  const double m = 1.0 / (0.6 * std::log(1.0 / 0.6)) *
                       std::pow(d / 0.01, std::log(1.0 / 0.6) / std::log(1.0 / 0.8)) +
                   complexity_K(t, 0.01);
  CHECK(complexity_M(t, 0.01) == doctest::Approx(m).epsilon(1e-12));
  CHECK(t.rate() == doctest::Approx(0.8));
  CHECK(rate_constants(0.6, 0.6 + 1e-13, 0.2, 1.0, 1.0).tie);
  CHECK_FALSE(rate_constants(0.6, 0.6 + 1e-9, 0.2, 1.0, 1.0).tie);
  CHECK_THROWS_AS(rate_constants(0.6, 0.6, 0.2, 1.0, 1.0, 0.5), Error);
}

TEST_CASE("branch boundary: constants agree up to the factor e") {
  // Approaching rho -> q from below, the unequal-rate constant C(rho,q)
  // diverges like alpha^2 nu^2 q / (q - rho), while the tie constant with
  // rho_tilde = q + delta grows like alpha^2 nu^2 q / (e delta). The two
  // branches therefore differ by about e, not by 1%.
  const double q = 0.75, delta = 1e-6, alpha = 0.25, nu = 1.0;
  const RateConstants below = rate_constants(q, q - delta, alpha, nu, 1.0);
  const RateConstants tie = rate_constants(q, q, alpha, nu, 1.0, q + delta);
  REQUIRE(tie.tie);
  CHECK(below.c_rho_q / tie.d_tilde == doctest::Approx(std::exp(1.0)).epsilon(1e-4));
  const double eps = 1e-3;
  const double ratio = complexity_M(below, eps) / complexity_M(tie, eps);
  CHECK(ratio == doctest::Approx(std::exp(1.0)).epsilon(0.01));
  CHECK(complexity_K(below, eps) - complexity_K(tie, eps) ==
        doctest::Approx(1.0 / std::log(1.0 / q)).epsilon(1e-3));
}

TEST_CASE("K and M are nonincreasing in eps") {
  for (const auto& rc : {rate_constants(0.75, 0.5, 0.25, 1.0, 1.0),
                         rate_constants(0.5, 0.75, 0.25, 1.0, 1.0),
                         rate_constants(0.6, 0.6, 0.2, 1.0, 1.0)}) {
    double prev_k = INFINITY, prev_m = INFINITY;
    for (double eps = 1e-6; eps < 10.0; eps *= 1.7) {
      CHECK(complexity_K(rc, eps) <= prev_k);
      CHECK(complexity_M(rc, eps) <= prev_m);
      prev_k = complexity_K(rc, eps);
      prev_m = complexity_M(rc, eps);
    }
  }
  CHECK_THROWS_AS(complexity_K(rate_constants(0.75, 0.5, 0.25, 1.0, 1.0), 0.0), Error);
}

TEST_CASE("auto_step_params examples") {
  StepAndRatio p = auto_step_params(1, 2);
  CHECK(p.alpha == doctest::Approx(0.25));
  CHECK(p.rho == doctest::Approx(0.875));
  CHECK(contraction_factor_q(1, 2, p.alpha) < p.rho);
  p = auto_step_params(1, 1);
  CHECK(p.alpha == doctest::Approx(1.0));
  CHECK(p.rho == doctest::Approx(0.5));
  CHECK(contraction_factor_q(1, 1, p.alpha) == doctest::Approx(0.0));
  p = auto_step_params(0.1, 1);
  CHECK(p.alpha == doctest::Approx(0.1));
  CHECK(p.rho == doctest::Approx(0.995));
  CHECK(contraction_factor_q(0.1, 1, p.alpha) == doctest::Approx(0.99));
}

TEST_CASE("zero-noise runs contract by q every step") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    QuadraticGameOptions opts;
    if (seed % 2) opts.regularizer = Regularizer::l1(0.3);
    const QuadraticGame g = generate_quadratic_game(3, 2, 0.3, seed, opts);
    const StrategyProfile xs = solve_ne_oracle(g);
    PgrConfig cfg;
    cfg.alpha = g.constants().eta / (g.constants().lip * g.constants().lip);
    cfg.rho = 0.8;
    cfg.max_iter = 30;
    const double q = contraction_factor_q(g.constants().eta, g.constants().lip, cfg.alpha);
    const RunTrace t = run_vs_pgr(g, cfg, NoiseModel::zero(), StrategyProfile::zeros(g.layout()), xs);
    const auto e = t.errors();
    for (std::size_t k = 0; k + 1 < e.size(); ++k) CHECK(e[k + 1] <= q * e[k] + 1e-12);
  }
}

TEST_CASE("single player matches a reference mini-batch SGD loop") {
  Matrix H(1, 1);
  H << 3.0;
  Vector c(1);
  c << -1.5;
  const QuadraticGame g(BlockLayout::scalar(1), H, c);
  PgrConfig cfg;
  cfg.alpha = 0.2;
  cfg.rho = 0.7;
  cfg.max_iter = 25;
  cfg.seed = 99;
  const double nu = 0.8;
  const RunTrace t = run_vs_pgr(g, cfg, NoiseModel::gaussian(nu), StrategyProfile::zeros(g.layout()));

  double x = 0.0;
  for (std::uint64_t k = 0; k < cfg.max_iter; ++k) {
    const double batch = std::ceil(std::pow(cfg.rho, -static_cast<double>(k + 1)) - 1e-9);
    std::mt19937_64 eng = stream_engine(cfg.seed, k, 0);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double w = nu / std::sqrt(batch) * n01(eng);
    x = x - cfg.alpha * (3.0 * x - 1.5 + w);
    CHECK(static_cast<double>(t.records[k].batch) == batch);
  }
  CHECK(t.final_profile.flat()(0) == x);
}

TEST_CASE("run_vs_pgr counters, validation and ablation schedule") {
  const QuadraticGame g = reference_game();
  const StrategyProfile x0 = StrategyProfile::zeros(g.layout());
  PgrConfig cfg;
  cfg.alpha = 0.2;
  cfg.rho = 0.9;
  cfg.max_iter = 20;
  const RunTrace t = run_vs_pgr(g, cfg, NoiseModel::gaussian(1.0), x0);
  CHECK(t.final_counters.total_samples == BatchSchedule::geometric_pgr(0.9).cumulative(20));
  CHECK(t.final_counters.prox_evals == 20);
  for (std::size_t k = 1; k < t.records.size(); ++k)
    CHECK(t.records[k].counters.total_samples - t.records[k - 1].counters.total_samples ==
          t.records[k - 1].batch);

  cfg.schedule = BatchSchedule::constant(3);
  CHECK(run_vs_pgr(g, cfg, NoiseModel::zero(), x0).final_counters.total_samples == 60);

  cfg.alpha = 2.0 / 9.0;
  CHECK(category_of([&] { run_vs_pgr(g, cfg, NoiseModel::zero(), x0); }) == ErrorCategory::InvalidStep);

  const QuadraticGame boxed(g.layout(), g.hessian(), g.linear(),
                            std::vector<Regularizer>(2, Regularizer::box(1, 1.0, 2.0)));
  cfg.alpha = 0.2;
  CHECK(category_of([&] { run_vs_pgr(boxed, cfg, NoiseModel::zero(), x0); }) ==
        ErrorCategory::InvalidParameter);
}

TEST_CASE("target_eps runs ceil(K(eps)) iterations") {
  const QuadraticGame g = reference_game();
  const StrategyProfile xs = solve_ne_oracle(g);
  const StrategyProfile x0 = StrategyProfile::zeros(g.layout());
  PgrConfig cfg;
  cfg.alpha = 0.2;
  cfg.rho = 0.9;
  cfg.target_eps = 1e-3;
  const RunTrace t = run_vs_pgr(g, cfg, NoiseModel::gaussian(1.0), x0, xs);
  const RateConstants rc = pgr_rate_constants(g.constants(), cfg, 1.0, 2.0 / 9.0);
  CHECK(t.iterations() == static_cast<std::uint64_t>(std::ceil(complexity_K(rc, 1e-3))));
}

TEST_CASE("non-finite iterates raise Divergence") {
  const QuadraticGame g = reference_game();
  Vector x0(2);
  x0 << std::numeric_limits<double>::infinity(), 0.0;
  PgrConfig cfg;
  cfg.alpha = 0.2;
  cfg.max_iter = 3;
  CHECK(category_of([&] { run_vs_pgr(g, cfg, NoiseModel::zero(), StrategyProfile(g.layout(), x0)); }) ==
        ErrorCategory::Divergence);
}

TEST_CASE("aggregative games run through the same scheme") {
  CournotParams p;
  p.a = Vector::Ones(3);
  p.b = Vector::Zero(3);
  p.d = 2.0;
  p.c_price = 1.0;
  p.lo = Vector::Zero(3);
  p.hi = Vector::Ones(3);
  const AggregativeGame g(p);
  const StrategyProfile xs = solve_ne_oracle(g);
  PgrConfig cfg;
  cfg.alpha = g.constants().eta / (g.constants().lip * g.constants().lip);
  cfg.rho = 0.9;
  cfg.max_iter = 200;
  const double q = contraction_factor_q(g.constants().eta, g.constants().lip, cfg.alpha);
  const RunTrace t = run_vs_pgr(g, cfg, NoiseModel::zero(), StrategyProfile::zeros(g.layout()), xs);
  CHECK(t.final_error <= std::pow(q, 200.0) * t.records.front().error + 1e-24);
}
