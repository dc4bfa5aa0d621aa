#include "vsnash/experiment.hpp"
#include "vsnash/generators.hpp"
#include "vsnash/rate_fit.hpp"
#include "vsnash/vs_pgr.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

using namespace vsnash;

namespace {

ErrorCategory category_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected an Error");
  return ErrorCategory::Contract;
}

Json reference_pgr_config() {
  return Json::parse(R"({
    "scheme": "pgr", "seed": 3, "replications": 4,
    "game": {"family": "quadratic", "H": [[2, 1], [1, 2]], "c": [-1, -1]},
    "noise": {"type": "gaussian", "nu": 1.0},
    "solver": {"alpha": 0.2, "rho": 0.9, "max_iter": 30},
    "analysis": {"eps": 0.001}
  })");
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("generate_quadratic_game") {
  const QuadraticGame dec = generate_quadratic_game(3, 2, 0.0, 5);
  double min_eig = INFINITY;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) {
      if (i == j) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(dec.block(i, i));
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      } else {
        CHECK(dec.block(i, j).norm() == 0.0);
      }
    }
  CHECK(dec.constants().eta == doctest::Approx(min_eig).epsilon(1e-12));

  const QuadraticGame a = generate_quadratic_game(3, 2, 0.3, 42);
  const QuadraticGame b = generate_quadratic_game(3, 2, 0.3, 42);
  CHECK(a.hessian() == b.hessian());
  CHECK(a.linear() == b.linear());
  CHECK(a.hessian() != generate_quadratic_game(3, 2, 0.3, 43).hessian());
  CHECK(a.block(0, 1).jacobiSvd().singularValues()(0) == doctest::Approx(0.3));

  const AnyGame explicit_game = build_game(
      Json::parse(R"({"family": "quadratic", "H": [[2, 1], [1, 2]], "c": [0, 0]})"), 0);
  const GameConstants& k = std::get<QuadraticGame>(explicit_game).constants();
  CHECK(k.eta == doctest::Approx(1.0));
  CHECK(k.lip == doctest::Approx(3.0));
  CHECK(k.kappa == doctest::Approx(3.0));

  QuadraticGameOptions opts;
  opts.max_tries = 3;
  CHECK(category_of([&] { generate_quadratic_game(4, 1, 50.0, 1, opts); }) == ErrorCategory::InvalidParameter);
  CHECK_THROWS_AS(generate_quadratic_game(0, 1, 0.1, 1), Error);
}

TEST_CASE("generate_cournot_game") {
  const AggregativeGame g =
      generate_cournot_game(2, Vector::Ones(2), Vector::Zero(2), 2.0, 1.0, 0.0, 1.0, 0);
  Matrix J(2, 2);
  J << 3, 1, 1, 3;
  CHECK(g.jacobian() == J);
  CHECK(g.constants().eta == doctest::Approx(2.0));
  CHECK(g.constants().lip == doctest::Approx(4.0));
  CHECK(g.m_compact() == 2.0);

  Vector a(3);
  a << 0.7, 1.2, 0.9;
  const AggregativeGame free = generate_cournot_game(3, a, Vector::Zero(3), 1.0, 0.0, 0.0, 1.0, 0);
  CHECK(free.constants().eta == doctest::Approx(0.7));
  CHECK(generate_cournot_game(5, {}, {}, 1.0, 0.5, 0.0, 1.0, 3).m_compact() == 5.0);
  CHECK(generate_cournot_game(4, {}, {}, 1.0, 0.5, 0.0, 1.0, 3).params().a ==
        generate_cournot_game(4, {}, {}, 1.0, 0.5, 0.0, 1.0, 3).params().a);
  CHECK(category_of([] { generate_cournot_game(2, -Vector::Ones(2), Vector::Zero(2), 1.0, 0.5, 0.0, 1.0, 0); }) ==
        ErrorCategory::NotStronglyMonotone);
}

TEST_CASE("fit_linear_rate") {
  std::vector<double> e;
  for (int k = 0; k <= 30; ++k) e.push_back(std::pow(0.8, k));
  RateFit f = fit_linear_rate(e, 0, 30);
  CHECK(f.slope == doctest::Approx(std::log(0.8)).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));

  e.clear();
  for (int k = 0; k <= 30; ++k) e.push_back(5.0 * std::pow(0.9, k));
  f = fit_linear_rate(e, 0, 30);
  CHECK(f.slope == doctest::Approx(-0.10536).epsilon(1e-4));
  CHECK(f.intercept == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  f = fit_linear_rate(std::vector<double>(10, 1.0), 0, 9);
  CHECK(f.slope == doctest::Approx(0.0));

  std::vector<double> z{1.0, 0.0, 0.5, 0.25, 0.125};
  f = fit_linear_rate(z, 0, 4);
  CHECK(f.dropped == 1);
  CHECK(f.points == 4);

  CHECK(category_of([] { fit_linear_rate({1.0, 0.5}, 0, 1); }) == ErrorCategory::InvalidParameter);
  CHECK(category_of([] { fit_linear_rate({1.0, 0.0, 0.0, 0.2}, 0, 3); }) == ErrorCategory::InvalidParameter);
}

TEST_CASE("config validation rejects unknown keys and bad types") {
  Json doc = reference_pgr_config();
  CHECK_NOTHROW(parse_experiment_spec(doc));
  doc["bogus"] = 1;
  CHECK(category_of([&] { parse_experiment_spec(doc); }) == ErrorCategory::Config);
  doc = reference_pgr_config();
  doc["solver"]["step"] = 0.1;
  CHECK(category_of([&] { parse_experiment_spec(doc); }) == ErrorCategory::Config);
  doc = reference_pgr_config();
  doc["seed"] = "seven";
  CHECK(category_of([&] { parse_experiment_spec(doc); }) == ErrorCategory::Config);
  doc = reference_pgr_config();
  doc["scheme"] = "sgd";
  CHECK(category_of([&] { parse_experiment_spec(doc); }) == ErrorCategory::Config);
  doc = reference_pgr_config();
  doc["game"]["H"] = Json::array({Json::array({1, 2})});
  CHECK(category_of([&] { run_experiment(parse_experiment_spec(doc)); }) == ErrorCategory::Config);
  doc = reference_pgr_config();
  doc["game"]["regularizers"] = Json{{"type", "l2"}};
  CHECK(category_of([&] { run_experiment(parse_experiment_spec(doc)); }) == ErrorCategory::Config);
}

TEST_CASE("game JSON round trip") {
  QuadraticGameOptions opts;
  opts.regularizer = Regularizer::box(2, -1.0, 1.0);
  const QuadraticGame q = generate_quadratic_game(2, 2, 0.2, 9, opts);
  const Json j = game_to_json(q);
  const QuadraticGame back = std::get<QuadraticGame>(build_game(j, 0));
  CHECK(back.hessian() == q.hessian());
  CHECK(back.linear() == q.linear());
  CHECK(back.layout() == q.layout());
  CHECK(game_to_json(back) == j);

  const AggregativeGame c = generate_cournot_game(3, {}, {}, 2.0, 0.5, 0.0, 1.0, 4);
  const AggregativeGame cb = std::get<AggregativeGame>(build_game(game_to_json(c), 0));
  CHECK(cb.params().a == c.params().a);
  CHECK(game_to_json(cb) == game_to_json(c));
}

TEST_CASE("bounds scheme plugs the complexity formulas") {
  const Json doc = Json::parse(R"({
    "scheme": "bounds",
    "bounds": {"eta": 1, "lip": 2, "nu": 1, "alpha": 0.25, "rho": 0.875, "c_start": 1, "eps": 0.01}
  })");
  const ExperimentResult r = run_experiment(parse_experiment_spec(doc));
  CHECK(r.csv.empty());
  const Json& b = r.report["bounds"];
  CHECK(b["q"].get<double>() == doctest::Approx(0.75));
  const RateConstants rc = rate_constants(0.75, 0.875, 0.25, 1.0, 1.0);
  CHECK(b["K"].get<double>() == doctest::Approx(complexity_K(rc, 0.01)).epsilon(1e-12));
  CHECK(b["M"].get<double>() == doctest::Approx(complexity_M(rc, 0.01)).epsilon(1e-12));
}

TEST_CASE("pgr experiment: row count, determinism and consistent verdicts") {
  const ExperimentSpec spec = parse_experiment_spec(reference_pgr_config());
  const ExperimentResult a = run_experiment(spec);
  const ExperimentResult b = run_experiment(spec);
  CHECK(a.csv == b.csv);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(count_lines(a.csv) == 30 * 4 + 1);
  CHECK(a.csv.substr(0, a.csv.find('\n')) == "k,N_k,cum_samples,cum_prox,sq_error,replication_id");
  CHECK(a.report["status"] == "ok");

  const auto mean = a.report["mean_error"].get<std::vector<double>>();
  const auto env = a.report["envelope"].get<std::vector<double>>();
  bool ok = true;
  for (std::size_t k = 0; k < mean.size(); ++k) ok = ok && mean[k] <= env[k];
  CHECK(a.report["envelope_check"]["passed"].get<bool>() == ok);
  const RateFit fit = fit_linear_rate(mean, 5, 30);
  CHECK(a.report["fit"]["slope"].get<double>() == fit.slope);
  CHECK(a.report["rate_check"]["passed"].get<bool>() ==
        (fit.slope <= a.report["theory"]["log_rate"].get<double>() + 0.05));

  ExperimentSpec other = spec;
  other.seed = 4;
  CHECK(run_experiment(other).csv != a.csv);
}

TEST_CASE("dist-pgr and pbr experiments write their column layouts") {
  const Json dist = Json::parse(R"({
    "scheme": "dist-pgr", "seed": 1, "replications": 2,
    "game": {"family": "cournot", "players": 4, "a": 1, "b": 0, "d": 2, "c_price": 1, "lo": 0, "hi": 1},
    "graph": {"family": "ring"},
    "noise": {"type": "gaussian", "nu_players": [0.5, 0.5, 0.5, 0.5]},
    "solver": {"alpha": 0.02, "max_iter": 12},
    "analysis": {"eps": 0.01}
  })");
  const ExperimentResult d = run_experiment(parse_experiment_spec(dist));
  CHECK(count_lines(d.csv) == 12 * 2 + 1);
  CHECK(d.csv.substr(0, d.csv.find('\n')) ==
        "k,N_k,tau_k,cum_samples,cum_prox,cum_comm,sq_error,consensus_error,replication_id");
  CHECK(d.report["consensus_check"]["passed"].get<bool>());
  CHECK(d.report["theory"].contains("comm"));

  const Json pbr = Json::parse(R"({
    "scheme": "pbr", "seed": 1, "replications": 3,
    "game": {"family": "quadratic", "H": [[2, 1], [1, 2]], "c": [-1, -1]},
    "noise": {"type": "gaussian", "nu_players": [1, 1]},
    "solver": {"mu": 1, "eta_br": 0.7, "eta_tilde": 0.75, "max_iter": 8},
    "analysis": {"eps": 0.01}
  })");
  const ExperimentResult p = run_experiment(parse_experiment_spec(pbr));
  CHECK(count_lines(p.csv) == 8 * 3 + 1);
  CHECK(p.csv.substr(0, p.csv.find('\n')) == "k,batch_N_k,cum_samples,inner_solves,error_norm,replication_id");
  CHECK(p.report["certificate"]["a"].get<double>() == doctest::Approx(2.0 / 3));
  CHECK(p.report["sample_check"]["passed"].get<bool>());
}

TEST_CASE("failed replications are reported") {
  const Json pbr = Json::parse(R"({
    "scheme": "pbr", "seed": 1, "replications": 2,
    "game": {"family": "quadratic", "H": [[2, 1], [1, 2]], "c": [-1, -1]},
    "noise": {"type": "gaussian", "nu_players": [1, 1]},
    "solver": {"mu": 1, "eta_br": 0.7, "max_iter": 3, "inner_max_iter": 1}
  })");
  const ExperimentResult r = run_experiment(parse_experiment_spec(pbr));
  CHECK(r.report["status"] == "failed");
  CHECK(r.report["failed_replications"].size() == 2);
  CHECK(r.report["failed_replications"][0]["category"] == "inner-solve-failure");
  CHECK(count_lines(r.csv) == 1);
}

TEST_CASE("validate reports constants and rejects broken assumptions") {
  Json doc = reference_pgr_config();
  const Json v = validate_experiment(parse_experiment_spec(doc));
  CHECK(v["constants"]["eta"].get<double>() == doctest::Approx(1.0));
  CHECK(v["checks"]["alpha_admissible"].get<bool>());
  doc["game"]["H"] = Json::parse("[[1, 2], [0, 1]]");
  CHECK(category_of([&] { validate_experiment(parse_experiment_spec(doc)); }) ==
        ErrorCategory::NotStronglyMonotone);
  const Json graph = Json::parse(R"({
    "scheme": "dist-pgr",
    "game": {"family": "cournot", "players": 4, "a": 1, "b": 0, "d": 2, "c_price": 1, "lo": 0, "hi": 1},
    "graph": {"family": "edges", "edges": [[0, 1], [2, 3]]},
    "solver": {"alpha": 0.02}
  })");
  CHECK(category_of([&] { validate_experiment(parse_experiment_spec(graph)); }) == ErrorCategory::Disconnected);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -2.5}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::nan("")) == "nan");
}
