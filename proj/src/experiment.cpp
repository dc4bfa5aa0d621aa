#include "vsnash/experiment.hpp"

#include "vsnash/dist_vs_pgr.hpp"
#include "vsnash/generators.hpp"
#include "vsnash/rate_fit.hpp"
#include "vsnash/vs_pbr.hpp"
#include "vsnash/vs_pgr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace vsnash {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCategory::Config, what); }

void check_object(const Json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(ctx + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) config_error("unknown key '" + k + "' in " + ctx);
}

double get_number(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) config_error(ctx + "." + key + " is required");
  if (!j.at(key).is_number()) config_error(ctx + "." + key + " must be a number");
  return j.at(key).get<double>();
}

std::optional<double> opt_number(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_number(j, key, ctx);
}

std::uint64_t get_count(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) config_error(ctx + "." + key + " is required");
  const Json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 &&
                                 !v.is_number_unsigned()))
    config_error(ctx + "." + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::optional<std::uint64_t> opt_count(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_count(j, key, ctx);
}

bool opt_bool(const Json& j, const char* key, const std::string& ctx, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) config_error(ctx + "." + key + " must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) config_error(ctx + "." + key + " is required");
  if (!j.at(key).is_string()) config_error(ctx + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

Vector to_vector(const Json& j, const std::string& ctx) {
  if (!j.is_array()) config_error(ctx + " must be an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) config_error(ctx + " must be an array of numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

/// A number broadcast to `n` entries, or an array of length n.
Vector to_vector_or_scalar(const Json& j, Index n, const std::string& ctx) {
  if (j.is_number()) return Vector::Constant(n, j.get<double>());
  Vector v = to_vector(j, ctx);
  if (v.size() != n) config_error(ctx + " must have " + std::to_string(n) + " entries");
  return v;
}

Matrix to_matrix(const Json& j, const std::string& ctx) {
  if (!j.is_array() || j.empty()) config_error(ctx + " must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = to_vector(j[r], ctx);
    if (static_cast<std::size_t>(row.size()) != cols) config_error(ctx + " rows differ in length");
    m.row(static_cast<Index>(r)) = row.transpose();
  }
  return m;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vector(m.row(r).transpose())));
  return a;
}

Regularizer parse_regularizer(const Json& j, Index dim, const std::string& ctx) {
  check_object(j, ctx, {"type", "weight", "lo", "hi"});
  const std::string type = get_string(j, "type", ctx);
  if (type == "zero") {
    check_object(j, ctx, {"type"});
    return Regularizer::zero();
  }
  if (type == "l1") {
    check_object(j, ctx, {"type", "weight"});
    try {
      return Regularizer::l1(get_number(j, "weight", ctx));
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::Config) throw;
      config_error(ctx + ": " + e.what());
    }
  }
  if (type == "box") {
    check_object(j, ctx, {"type", "lo", "hi"});
    if (!j.contains("lo") || !j.contains("hi")) config_error(ctx + " box needs lo and hi");
    try {
      return Regularizer::box(to_vector_or_scalar(j.at("lo"), dim, ctx + ".lo"),
                              to_vector_or_scalar(j.at("hi"), dim, ctx + ".hi"));
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::Config) throw;
      config_error(ctx + ": " + e.what());
    }
  }
  config_error(ctx + ".type must be one of zero, l1, box");
}

std::vector<Regularizer> parse_regularizers(const Json& game, const BlockLayout& layout) {
  std::vector<Regularizer> regs;
  if (!game.contains("regularizers")) {
    regs.assign(static_cast<std::size_t>(layout.players()), Regularizer::zero());
    return regs;
  }
  const Json& r = game.at("regularizers");
  if (r.is_object()) {
    for (Index i = 0; i < layout.players(); ++i)
      regs.push_back(parse_regularizer(r, layout.dim(i), "game.regularizers"));
    return regs;
  }
  if (!r.is_array() || static_cast<Index>(r.size()) != layout.players())
    config_error("game.regularizers must be an object or one entry per player");
  for (Index i = 0; i < layout.players(); ++i)
    regs.push_back(parse_regularizer(r[static_cast<std::size_t>(i)], layout.dim(i),
                                     "game.regularizers[" + std::to_string(i) + "]"));
  return regs;
}

StrategyProfile parse_x0(const Json& solver, const BlockLayout& layout,
                         const std::vector<Regularizer>& regs) {
  if (solver.contains("x0")) {
    Vector x = to_vector(solver.at("x0"), "solver.x0");
    if (x.size() != layout.total())
      config_error("solver.x0 must have " + std::to_string(layout.total()) + " entries");
    return StrategyProfile(layout, std::move(x));
  }
  // Closest point of dom(r) to the origin.
  return StrategyProfile(layout, prox_profile(regs, layout, Vector::Zero(layout.total()), 1.0));
}

struct FitWindow {
  std::size_t lo;
  std::size_t hi;
};

FitWindow parse_fit_window(const Json& analysis, std::size_t K) {
  FitWindow w{5, K};
  if (analysis.contains("fit_window")) {
    const Json& fw = analysis.at("fit_window");
    if (!fw.is_array() || fw.size() != 2 || !fw[0].is_number_unsigned() ||
        !fw[1].is_number_unsigned())
      config_error("analysis.fit_window must be [k_lo, k_hi]");
    w.lo = fw[0].get<std::size_t>();
    w.hi = std::min<std::size_t>(fw[1].get<std::size_t>(), K);
  }
  return w;
}

const std::string kSpecCtx = "config";

Json counters_json(const SampleCounter& c) {
  return Json{{"total_samples", c.total_samples},
              {"prox_evals", c.prox_evals},
              {"comm_rounds", c.comm_rounds},
              {"inner_solves", c.inner_solves}};
}

Json constants_json(const GameConstants& k) {
  Json j{{"eta", k.eta}, {"lip", k.lip}, {"kappa", k.kappa}};
  if (k.m_compact) j["m_compact"] = *k.m_compact;
  return j;
}

/// Replication outcomes and trace aggregation shared by all schemes.
struct Replicated {
  std::vector<RunTrace> traces;  // successful runs in id order
  std::vector<std::uint64_t> ids;
  Json failures = Json::array();
};

template <typename RunFn>
Replicated replicate(const ExperimentSpec& spec, RunFn&& run) {
  Replicated out;
  for (std::uint64_t r = 0; r < spec.replications; ++r) {
    try {
      out.traces.push_back(run(replication_seed(spec.seed, r)));
      out.ids.push_back(r);
    } catch (const Error& e) {
      out.failures.push_back(
          Json{{"replication_id", r}, {"category", category_name(e.category())}, {"message", e.what()}});
    }
  }
  return out;
}

std::vector<double> mean_errors(const Replicated& rep) {
  if (rep.traces.empty()) return {};
  std::vector<double> mean(rep.traces.front().errors().size(), 0.0);
  for (const RunTrace& t : rep.traces) {
    const auto e = t.errors();
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += e[k];
  }
  for (double& m : mean) m /= static_cast<double>(rep.traces.size());
  return mean;
}

/// Rate fit, envelope check and first-hit statistics written into `report`.
template <typename Envelope>
void analyse(Json& report, const Replicated& rep, const Json& analysis, double theory_rate,
             Envelope&& envelope) {
  if (rep.traces.empty()) {
    report["status"] = "failed";
    return;
  }
  report["status"] = rep.failures.empty() ? "ok" : "partial";
  const std::vector<double> mean = mean_errors(rep);
  report["mean_error"] = mean;
  const std::size_t K = mean.size() - 1;

  const double log_rate = std::log(theory_rate);
  report["theory"]["rate"] = theory_rate;
  report["theory"]["log_rate"] = log_rate;

  std::vector<double> env(mean.size());
  std::optional<std::size_t> violation;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    env[k] = envelope(static_cast<double>(k));
    if (!(mean[k] <= env[k]) && !violation) violation = k;
  }
  report["envelope"] = env;
  report["envelope_check"] = Json{{"passed", !violation.has_value()},
                                  {"first_violation", violation ? Json(*violation) : Json(nullptr)}};

  const double tol = opt_number(analysis, "slope_tolerance", "analysis").value_or(0.05);
  const FitWindow w = parse_fit_window(analysis, K);
  try {
    const RateFit fit = fit_linear_rate(mean, w.lo, w.hi);
    const double half = 1.96 * fit.slope_stderr;
    report["fit"] = Json{{"window", {w.lo, w.hi}},
                         {"slope", fit.slope},
                         {"intercept", fit.intercept},
                         {"r2", fit.r2},
                         {"slope_ci", {fit.slope - half, fit.slope + half}},
                         {"points", fit.points},
                         {"dropped", fit.dropped}};
    report["rate_check"] = Json{{"passed", fit.slope <= log_rate + tol}, {"tolerance", tol}};
  } catch (const Error& e) {
    report["fit"] = Json{{"window", {w.lo, w.hi}}, {"error", e.what()}};
    report["rate_check"] = Json{{"passed", false}, {"tolerance", tol}};
  }

  if (const auto eps = opt_number(analysis, "eps", "analysis")) {
    Json hit{{"eps", *eps}, {"first_k", nullptr}, {"samples", nullptr}};
    const RunTrace& t0 = rep.traces.front();
    for (std::size_t k = 0; k < mean.size(); ++k) {
      if (mean[k] <= *eps) {
        hit["first_k"] = k;
        hit["samples"] = k < t0.records.size() ? t0.records[k].counters.total_samples
                                               : t0.final_counters.total_samples;
        break;
      }
    }
    report["eps_hit"] = hit;
  }
  report["counters"] = counters_json(rep.traces.front().final_counters);
}

void append_row(std::string& csv, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) csv += ',';
    csv += c;
    first = false;
  }
  csv += '\n';
}

std::string u(std::uint64_t v) { return std::to_string(v); }

Json bounds_report(const Json& b) {
  const std::string ctx = "bounds";
  const std::string kind = b.contains("kind") ? get_string(b, "kind", ctx) : "pgr";
  Json rep{{"kind", kind}};
  const double eps = get_number(b, "eps", ctx);
  const double c_start = get_number(b, "c_start", ctx);
  if (kind == "pgr") {
    check_object(b, ctx, {"kind", "eta", "lip", "nu", "alpha", "rho", "auto_step", "c_start", "eps",
                          "rho_tilde"});
    const double eta = get_number(b, "eta", ctx);
    const double lip = get_number(b, "lip", ctx);
    double alpha = 0.0, rho = 0.0;
    if (opt_bool(b, "auto_step", ctx, false)) {
      const StepAndRatio sr = auto_step_params(eta, lip);
      alpha = sr.alpha;
      rho = sr.rho;
    } else {
      alpha = get_number(b, "alpha", ctx);
      rho = get_number(b, "rho", ctx);
    }
    const double q = contraction_factor_q(eta, lip, alpha);
    const RateConstants rc =
        rate_constants(q, rho, alpha, get_number(b, "nu", ctx), c_start, opt_number(b, "rho_tilde", ctx));
    rep["alpha"] = alpha;
    rep["rho"] = rho;
    rep["q"] = q;
    rep["tie"] = rc.tie;
    rep["rate"] = rc.rate();
    rep[rc.tie ? "d_tilde" : "c_rho_q"] = rc.tie ? rc.d_tilde : rc.c_rho_q;
    rep["K"] = complexity_K(rc, eps);
    rep["M"] = complexity_M(rc, eps);
  } else if (kind == "dist-pgr") {
    check_object(b, ctx, {"kind", "eta", "lip", "alpha", "beta", "theta", "m_compact", "lip_players",
                          "nu_players", "c_start", "eps"});
    if (!b.contains("lip_players") || !b.contains("nu_players"))
      config_error("bounds.lip_players and bounds.nu_players are required");
    const DistRateConstants rc = dist_rate_constants(
        get_number(b, "alpha", ctx), get_number(b, "eta", ctx), get_number(b, "lip", ctx),
        get_number(b, "beta", ctx), opt_number(b, "theta", ctx).value_or(1.0),
        get_number(b, "m_compact", ctx), to_vector(b.at("lip_players"), "bounds.lip_players"),
        to_vector(b.at("nu_players"), "bounds.nu_players"), c_start);
    const DistComplexity dc = dist_complexity(rc, eps);
    rep["varrho"] = rc.varrho;
    rep["c1"] = rc.c1;
    rep["c2"] = rc.c2;
    rep["c3"] = rc.c3;
    rep["tie"] = rc.tie;
    rep["rate"] = rc.rate();
    rep[rc.tie ? "d_tilde" : "c_tilde"] = rc.tie ? rc.d_tilde : rc.c_tilde;
    rep["K"] = dc.K;
    rep["M"] = dc.samples;
    rep["comm"] = dc.comm;
  } else if (kind == "pbr") {
    check_object(b, ctx, {"kind", "a", "eta_br", "eta_tilde", "m_max", "c_r", "players", "c_start",
                          "eps"});
    PbrConfig pc;
    pc.eta_br = get_number(b, "eta_br", ctx);
    pc.eta_tilde = opt_number(b, "eta_tilde", ctx);
    pc.m_max = get_number(b, "m_max", ctx);
    pc.c_r = get_number(b, "c_r", ctx);
    const PbrComplexity cx = pbr_complexity(pc, get_number(b, "a", ctx), eps,
                                            static_cast<Index>(get_count(b, "players", ctx)), c_start);
    rep["eta_tilde"] = cx.envelope.eta_tilde;
    rep["d"] = cx.envelope.d;
    rep["scale"] = cx.envelope.scale;
    rep["K"] = cx.K;
    rep["M"] = cx.samples;
    rep["M_order"] = cx.samples_order;
  } else {
    config_error("bounds.kind must be one of pgr, dist-pgr, pbr");
  }
  rep["eps"] = eps;
  rep["c_start"] = c_start;
  return rep;
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Pgr: return "pgr";
    case Scheme::DistPgr: return "dist-pgr";
    case Scheme::Pbr: return "pbr";
    case Scheme::Bounds: return "bounds";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "pgr") return Scheme::Pgr;
  if (name == "dist-pgr") return Scheme::DistPgr;
  if (name == "pbr") return Scheme::Pbr;
  if (name == "bounds") return Scheme::Bounds;
  config_error("scheme must be one of pgr, dist-pgr, pbr, bounds (got '" + name + "')");
}

ExperimentSpec parse_experiment_spec(const Json& doc) {
  check_object(doc, kSpecCtx,
               {"scheme", "seed", "replications", "game", "noise", "graph", "solver", "analysis",
                "bounds", "$schema"});
  ExperimentSpec s;
  s.scheme = parse_scheme(get_string(doc, "scheme", kSpecCtx));
  s.seed = opt_count(doc, "seed", kSpecCtx).value_or(0);
  s.replications = opt_count(doc, "replications", kSpecCtx).value_or(1);
  if (s.replications == 0) config_error("replications must be at least 1");
  auto sub = [&](const char* key) { return doc.contains(key) ? doc.at(key) : Json::object(); };
  s.game = sub("game");
  s.noise = doc.contains("noise") ? doc.at("noise") : Json{{"type", "zero"}};
  s.graph = sub("graph");
  s.solver = sub("solver");
  s.analysis = sub("analysis");
  s.bounds = sub("bounds");

  check_object(s.analysis, "analysis", {"fit_window", "eps", "slope_tolerance"});
  check_object(s.noise, "noise", {"type", "nu", "nu_players"});
  switch (s.scheme) {
    case Scheme::Pgr:
      check_object(s.solver, "solver",
                   {"alpha", "rho", "auto_step", "max_iter", "target_eps", "c_start", "x0", "batch"});
      break;
    case Scheme::DistPgr:
      check_object(s.solver, "solver", {"alpha", "beta", "max_iter", "c_start", "x0"});
      break;
    case Scheme::Pbr:
      check_object(s.solver, "solver",
                   {"mu", "eta_br", "eta_tilde", "m_max", "c_r", "inner_tol", "inner_max_iter",
                    "max_iter", "c_start", "x0", "allow_invalid_certificate"});
      break;
    case Scheme::Bounds:
      if (!doc.contains("bounds")) config_error("bounds scheme needs a bounds object");
      check_object(s.bounds, "bounds",
                   {"kind", "eta", "lip", "nu", "alpha", "rho", "auto_step", "c_start", "eps",
                    "rho_tilde", "beta", "theta", "m_compact", "lip_players", "nu_players", "a",
                    "eta_br", "eta_tilde", "m_max", "c_r", "players"});
      break;
  }
  if (s.scheme != Scheme::Bounds && !doc.contains("game")) config_error("game is required");
  if (s.scheme == Scheme::DistPgr && !doc.contains("graph")) config_error("graph is required");
  return s;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  Json doc;
  try {
    in >> doc;
  } catch (const Json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_experiment_spec(doc);
}

AnyGame build_game(const Json& g, std::uint64_t default_seed) {
  const std::string ctx = "game";
  const std::string family = get_string(g, "family", ctx);
  if (family == "quadratic") {
    check_object(g, ctx, {"family", "dims", "H", "c", "regularizers"});
    if (!g.contains("H") || !g.contains("c")) config_error("quadratic game needs H and c");
    Matrix H = to_matrix(g.at("H"), "game.H");
    Vector c = to_vector(g.at("c"), "game.c");
    if (H.rows() != H.cols() || H.rows() != c.size()) config_error("game.H must be square and match c");
    std::vector<Index> dims;
    if (g.contains("dims")) {
      for (const auto& d : g.at("dims")) {
        if (!d.is_number_integer() || d.get<long long>() < 1) config_error("game.dims must be positive integers");
        dims.push_back(d.get<Index>());
      }
    } else {
      dims.assign(static_cast<std::size_t>(H.rows()), 1);
    }
    BlockLayout layout(dims);
    if (layout.total() != H.rows()) config_error("game.dims must sum to the size of H");
    return QuadraticGame(layout, std::move(H), std::move(c), parse_regularizers(g, layout));
  }
  if (family == "random_quadratic") {
    check_object(g, ctx, {"family", "players", "dim", "coupling", "seed", "own_eig", "linear_scale",
                          "regularizer"});
    QuadraticGameOptions opts;
    if (g.contains("own_eig")) {
      const Vector e = to_vector(g.at("own_eig"), "game.own_eig");
      if (e.size() != 2) config_error("game.own_eig must be [lo, hi]");
      opts.own_eig_lo = e(0);
      opts.own_eig_hi = e(1);
    }
    opts.linear_scale = opt_number(g, "linear_scale", ctx).value_or(1.0);
    const Index dim = static_cast<Index>(get_count(g, "dim", ctx));
    if (g.contains("regularizer")) opts.regularizer = parse_regularizer(g.at("regularizer"), dim, "game.regularizer");
    return generate_quadratic_game(static_cast<Index>(get_count(g, "players", ctx)), dim,
                                   get_number(g, "coupling", ctx),
                                   opt_count(g, "seed", ctx).value_or(default_seed), opts);
  }
  if (family == "cournot") {
    check_object(g, ctx, {"family", "players", "a", "b", "d", "c_price", "lo", "hi", "seed"});
    const Index n = static_cast<Index>(get_count(g, "players", ctx));
    Vector a = g.contains("a") ? to_vector_or_scalar(g.at("a"), n, "game.a") : Vector();
    Vector b = g.contains("b") ? to_vector_or_scalar(g.at("b"), n, "game.b") : Vector();
    return generate_cournot_game(n, std::move(a), std::move(b), get_number(g, "d", ctx),
                                 get_number(g, "c_price", ctx), get_number(g, "lo", ctx),
                                 get_number(g, "hi", ctx),
                                 opt_count(g, "seed", ctx).value_or(default_seed));
  }
  config_error("game.family must be one of quadratic, random_quadratic, cournot");
}

NoiseModel build_noise(const Json& n) {
  check_object(n, "noise", {"type", "nu", "nu_players"});
  const std::string type = get_string(n, "type", "noise");
  if (type == "zero") return NoiseModel::zero();
  if (type == "gaussian") {
    if (n.contains("nu_players")) {
      if (n.contains("nu")) config_error("noise takes nu or nu_players, not both");
      return NoiseModel::gaussian_per_player(to_vector(n.at("nu_players"), "noise.nu_players"));
    }
    return NoiseModel::gaussian(get_number(n, "nu", "noise"));
  }
  config_error("noise.type must be zero or gaussian");
}

CommGraph build_graph(const Json& g, Index players, std::uint64_t default_seed) {
  const std::string ctx = "graph";
  check_object(g, ctx, {"family", "nodes", "rows", "cols", "p", "seed", "edges", "weights"});
  const std::string family = get_string(g, "family", ctx);
  const Index n = static_cast<Index>(opt_count(g, "nodes", ctx).value_or(static_cast<std::uint64_t>(players)));
  if (n != players) config_error("graph.nodes must equal the number of players");
  const std::string weights = g.contains("weights") ? get_string(g, "weights", ctx) : "metropolis";
  if (weights != "metropolis" && weights != "uniform")
    config_error("graph.weights must be metropolis or uniform");
  if (weights == "uniform") {
    if (family != "complete") config_error("uniform weights need the complete graph");
    return uniform_complete_graph(n);
  }
  std::vector<Edge> edges;
  if (family == "complete") edges = complete_edges(n);
  else if (family == "ring") edges = ring_edges(n);
  else if (family == "path") edges = path_edges(n);
  else if (family == "grid") {
    const Index rows = static_cast<Index>(get_count(g, "rows", ctx));
    const Index cols = static_cast<Index>(get_count(g, "cols", ctx));
    if (rows * cols != n) config_error("graph rows * cols must equal the number of players");
    edges = grid_edges(rows, cols);
  } else if (family == "erdos_renyi") {
    edges = erdos_renyi_edges(n, get_number(g, "p", ctx), opt_count(g, "seed", ctx).value_or(default_seed));
  } else if (family == "edges") {
    if (!g.contains("edges") || !g.at("edges").is_array()) config_error("graph.edges is required");
    for (const auto& e : g.at("edges")) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned())
        config_error("graph.edges entries must be [i, j]");
      edges.emplace_back(e[0].get<Index>(), e[1].get<Index>());
    }
  } else {
    config_error("graph.family must be one of complete, ring, path, grid, erdos_renyi, edges");
  }
  return build_metropolis_weights(edges, n);
}

Json regularizer_to_json(const Regularizer& r) {
  return std::visit(
      [](const auto& reg) -> Json {
        using T = std::decay_t<decltype(reg)>;
        if constexpr (std::is_same_v<T, ZeroRegularizer>) return Json{{"type", "zero"}};
        else if constexpr (std::is_same_v<T, L1Regularizer>) return Json{{"type", "l1"}, {"weight", reg.weight}};
        else return Json{{"type", "box"}, {"lo", to_json(reg.lo)}, {"hi", to_json(reg.hi)}};
      },
      r.variant());
}

Json game_to_json(const QuadraticGame& game) {
  Json regs = Json::array();
  for (const auto& r : game.regularizers()) regs.push_back(regularizer_to_json(r));
  return Json{{"family", "quadratic"},
              {"dims", game.layout().dims()},
              {"H", to_json(game.hessian())},
              {"c", to_json(game.linear())},
              {"regularizers", regs}};
}

Json game_to_json(const AggregativeGame& game) {
  const CournotParams& p = game.params();
  // The boxes are reported as scalars when uniform, matching the descriptor.
  const bool uniform = (p.lo.array() == p.lo(0)).all() && (p.hi.array() == p.hi(0)).all();
  return Json{{"family", "cournot"},
              {"players", game.players()},
              {"a", to_json(p.a)},
              {"b", to_json(p.b)},
              {"d", p.d},
              {"c_price", p.c_price},
              {"lo", uniform ? Json(p.lo(0)) : to_json(p.lo)},
              {"hi", uniform ? Json(p.hi(0)) : to_json(p.hi)}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  ExperimentResult out;
  Json& report = out.report;
  report["scheme"] = scheme_name(spec.scheme);
  report["seed"] = spec.seed;
  report["replications"] = spec.replications;

  if (spec.scheme == Scheme::Bounds) {
    report["bounds"] = bounds_report(spec.bounds);
    report["status"] = "ok";
    return out;
  }

  const AnyGame any = build_game(spec.game, spec.seed);
  const NoiseModel noise = build_noise(spec.noise);
  const Json& sv = spec.solver;
  const std::string sctx = "solver";
  std::string& csv = out.csv;

  std::visit([&](const auto& g) { report["game"] = game_to_json(g); }, any);

  if (spec.scheme == Scheme::Pgr) {
    const auto run_on = [&](const auto& game) {
      const GameConstants& gk = game.constants();
      const StrategyProfile x_star = solve_ne_oracle(game);
      const StrategyProfile x0 = parse_x0(sv, game.layout(), game.regularizers());
      PgrConfig cfg;
      if (opt_bool(sv, "auto_step", sctx, false)) {
        if (sv.contains("alpha") || sv.contains("rho"))
          config_error("solver.auto_step replaces alpha and rho");
        const StepAndRatio sr = auto_step_params(gk.eta, gk.lip);
        cfg.alpha = sr.alpha;
        cfg.rho = sr.rho;
      } else {
        cfg.alpha = get_number(sv, "alpha", sctx);
        cfg.rho = get_number(sv, "rho", sctx);
      }
      cfg.max_iter = opt_count(sv, "max_iter", sctx).value_or(cfg.max_iter);
      cfg.target_eps = opt_number(sv, "target_eps", sctx);
      const double c_start =
          opt_number(sv, "c_start", sctx).value_or((x0.flat() - x_star.flat()).squaredNorm());
      cfg.c_start = c_start;
      if (sv.contains("batch")) {
        const Json& b = sv.at("batch");
        if (b.is_string() && b.get<std::string>() == "geometric") {
        } else if (b.is_object() && b.size() == 1 && b.contains("constant") && b.at("constant").is_number_unsigned()) {
          cfg.schedule = BatchSchedule::constant(b.at("constant").get<std::uint64_t>());
        } else {
          config_error("solver.batch must be \"geometric\" or {\"constant\": m}");
        }
      }
      const double nu = noise.total_nu(game.layout());
      const RateConstants rc = pgr_rate_constants(gk, cfg, nu, c_start);

      report["constants"] = constants_json(gk);
      report["constants"]["nu"] = nu;
      report["x_star"] = to_json(x_star.flat());
      report["solver"] = Json{{"alpha", cfg.alpha}, {"rho", cfg.rho}, {"c_start", c_start}};
      Json theory{{"q", rc.q}, {"tie", rc.tie}};
      theory[rc.tie ? "d_tilde" : "c_rho_q"] = rc.tie ? rc.d_tilde : rc.c_rho_q;
      if (const auto eps = opt_number(spec.analysis, "eps", "analysis")) {
        theory["K"] = complexity_K(rc, *eps);
        theory["M"] = complexity_M(rc, *eps);
      }
      report["theory"] = theory;

      const Replicated rep = replicate(spec, [&](std::uint64_t seed) {
        PgrConfig c = cfg;
        c.seed = seed;
        return run_vs_pgr(game, c, noise, x0, x_star);
      });
      report["failed_replications"] = rep.failures;
      analyse(report, rep, spec.analysis, rc.rate(), [&](double k) { return rc.envelope(k); });
      if (!rep.traces.empty()) report["iterations"] = rep.traces.front().iterations();

      csv = "k,N_k,cum_samples,cum_prox,sq_error,replication_id\n";
      for (std::size_t t = 0; t < rep.traces.size(); ++t)
        for (const auto& r : rep.traces[t].records)
          append_row(csv, {u(r.k), u(r.batch), u(r.counters.total_samples), u(r.counters.prox_evals),
                           format_double(r.error), u(rep.ids[t])});
    };
    std::visit(run_on, any);
    return out;
  }

  if (spec.scheme == Scheme::DistPgr) {
    const auto* game = std::get_if<AggregativeGame>(&any);
    if (!game) config_error("dist-pgr needs an aggregative (cournot) game");
    const CommGraph graph = build_graph(spec.graph, game->players(), spec.seed);
    const StrategyProfile x_star = solve_ne_oracle(*game);
    const StrategyProfile x0 = parse_x0(sv, game->layout(), game->regularizers());
    DistConfig cfg;
    cfg.alpha = get_number(sv, "alpha", sctx);
    cfg.beta = opt_number(sv, "beta", sctx);
    cfg.max_iter = opt_count(sv, "max_iter", sctx).value_or(cfg.max_iter);
    const double c_start =
        opt_number(sv, "c_start", sctx).value_or((x0.flat() - x_star.flat()).squaredNorm());
    cfg.c_start = c_start;
    const DistRateConstants rc = dist_rate_constants(*game, graph, cfg, noise, c_start);
    const MixingParams mix = mixing_params(graph);

    report["constants"] = constants_json(game->constants());
    report["constants"]["nu_players"] = to_json(noise.player_nu(game->layout()));
    report["graph"] = Json{{"nodes", graph.nodes()}, {"edges", graph.edges().size()},
                           {"beta", mix.beta}, {"theta", mix.theta}};
    report["x_star"] = to_json(x_star.flat());
    report["solver"] = Json{{"alpha", cfg.alpha}, {"beta", rc.beta}, {"c_start", c_start}};
    Json theory{{"varrho", rc.varrho}, {"c1", rc.c1}, {"c2", rc.c2}, {"c3", rc.c3}, {"tie", rc.tie}};
    theory[rc.tie ? "d_tilde" : "c_tilde"] = rc.tie ? rc.d_tilde : rc.c_tilde;
    if (const auto eps = opt_number(spec.analysis, "eps", "analysis")) {
      const DistComplexity dc = dist_complexity(rc, *eps);
      theory["K"] = dc.K;
      theory["M"] = dc.samples;
      theory["comm"] = dc.comm;
    }
    report["theory"] = theory;

    const Replicated rep = replicate(spec, [&](std::uint64_t seed) {
      DistConfig c = cfg;
      c.seed = seed;
      return run_dist_vs_pgr(*game, graph, c, noise, x0, x_star);
    });
    report["failed_replications"] = rep.failures;
    analyse(report, rep, spec.analysis, rc.rate(), [&](double k) { return rc.envelope(k); });
    if (!rep.traces.empty()) {
      report["iterations"] = rep.traces.front().iterations();
      // Consensus certificate: max_i |v_hat_i - xbar/N| <= 2 M beta^tau_k.
      const double m = game->m_compact();
      bool ok = true;
      for (const RunTrace& t : rep.traces)
        for (const auto& r : t.records)
          ok = ok && r.consensus_error <= 2.0 * m * std::pow(mix.beta, static_cast<double>(r.tau));
      report["consensus_check"] = Json{{"passed", ok}};
    }

    csv = "k,N_k,tau_k,cum_samples,cum_prox,cum_comm,sq_error,consensus_error,replication_id\n";
    for (std::size_t t = 0; t < rep.traces.size(); ++t)
      for (const auto& r : rep.traces[t].records)
        append_row(csv, {u(r.k), u(r.batch), u(r.tau), u(r.counters.total_samples),
                         u(r.counters.prox_evals), u(r.counters.comm_rounds), format_double(r.error),
                         format_double(r.consensus_error), u(rep.ids[t])});
    return out;
  }

  // Proximal best response.
  const QuadraticGame game = std::visit(
      [](const auto& g) -> QuadraticGame {
        if constexpr (std::is_same_v<std::decay_t<decltype(g)>, AggregativeGame>) return g.as_quadratic();
        else return g;
      },
      any);
  const StrategyProfile x_star = solve_ne_oracle(game);
  const StrategyProfile x0 = parse_x0(sv, game.layout(), game.regularizers());
  PbrConfig cfg;
  cfg.mu = opt_number(sv, "mu", sctx).value_or(cfg.mu);
  cfg.eta_br = opt_number(sv, "eta_br", sctx).value_or(cfg.eta_br);
  cfg.eta_tilde = opt_number(sv, "eta_tilde", sctx);
  cfg.m_max = opt_number(sv, "m_max", sctx);
  cfg.c_r = opt_number(sv, "c_r", sctx);
  cfg.inner_tol = opt_number(sv, "inner_tol", sctx).value_or(cfg.inner_tol);
  cfg.inner_max_iter = static_cast<long>(opt_count(sv, "inner_max_iter", sctx).value_or(
      static_cast<std::uint64_t>(cfg.inner_max_iter)));
  cfg.max_iter = opt_count(sv, "max_iter", sctx).value_or(cfg.max_iter);
  cfg.allow_invalid_certificate = opt_bool(sv, "allow_invalid_certificate", sctx, false);
  const ResolvedPbr rp = resolve_pbr(game, noise, cfg);
  double c_default = 0.0;
  for (Index i = 0; i < game.players(); ++i)
    c_default = std::max(c_default, (x0.block(i) - x_star.block(i)).norm());
  const double c_start = opt_number(sv, "c_start", sctx).value_or(c_default);

  report["constants"] = constants_json(game.constants());
  report["x_star"] = to_json(x_star.flat());
  report["certificate"] = Json{{"mu", rp.cert.mu}, {"a", rp.cert.a}, {"valid", rp.cert.valid()},
                               {"gamma", to_json(rp.cert.gamma)}};
  report["solver"] = Json{{"mu", cfg.mu}, {"eta_br", cfg.eta_br}, {"eta_tilde", rp.eta_tilde},
                          {"m_max", rp.m_max}, {"c_r", rp.c_r}, {"c_start", c_start}};
  std::optional<PbrEnvelope> env;
  if (rp.cert.valid()) {
    env = pbr_envelope(rp.cert.a, cfg.eta_br, rp.eta_tilde, game.players(), c_start);
    Json theory{{"c", env->c}, {"d", env->d}, {"scale", env->scale}};
    const auto eps = opt_number(spec.analysis, "eps", "analysis");
    if (eps && rp.m_max > 0.0) {
      const PbrComplexity cx = pbr_complexity(rp.config, rp.cert.a, *eps, game.players(), c_start);
      theory["K"] = cx.K;
      theory["M"] = cx.samples;
      theory["M_order"] = cx.samples_order;
    }
    report["theory"] = theory;
  }

  const Replicated rep = replicate(spec, [&](std::uint64_t seed) {
    PbrConfig c = rp.config;
    c.seed = seed;
    return run_vs_pbr(game, c, noise, x0, x_star);
  });
  report["failed_replications"] = rep.failures;
  if (env) {
    analyse(report, rep, spec.analysis, rp.eta_tilde, [&](double k) { return (*env)(k); });
  } else {
    // No certificate, so there is no envelope to check against.
    analyse(report, rep, spec.analysis, rp.eta_tilde,
            [](double) { return std::numeric_limits<double>::infinity(); });
    report["envelope_check"]["passed"] = nullptr;
  }
  if (!rep.traces.empty()) {
    report["iterations"] = rep.traces.front().iterations();
    report["sample_check"] = Json{
        {"passed", rep.traces.front().final_counters.total_samples ==
                       static_cast<std::uint64_t>(game.players()) * rp.schedule.cumulative(cfg.max_iter)}};
  }

  csv = "k,batch_N_k,cum_samples,inner_solves,error_norm,replication_id\n";
  for (std::size_t t = 0; t < rep.traces.size(); ++t)
    for (const auto& r : rep.traces[t].records)
      append_row(csv, {u(r.k), u(r.batch), u(r.counters.total_samples), u(r.counters.inner_solves),
                       format_double(r.error), u(rep.ids[t])});
  return out;
}

Json validate_experiment(const ExperimentSpec& spec) {
  Json out;
  if (spec.scheme == Scheme::Bounds) {
    out["bounds"] = bounds_report(spec.bounds);
    return out;
  }
  const AnyGame any = build_game(spec.game, spec.seed);
  const NoiseModel noise = build_noise(spec.noise);
  std::visit(
      [&](const auto& g) {
        out["game"] = game_to_json(g);
        out["constants"] = constants_json(g.constants());
        out["constants"]["nu_players"] = to_json(noise.player_nu(g.layout()));
        out["checks"]["strongly_monotone"] = true;
        out["checks"]["step_bound"] = 2.0 * g.constants().eta / (g.constants().lip * g.constants().lip);
        if (spec.solver.contains("alpha") && spec.solver.at("alpha").is_number()) {
          const double alpha = spec.solver.at("alpha").get<double>();
          const double bound = spec.scheme == Scheme::DistPgr
                                   ? g.constants().eta / (g.constants().lip * g.constants().lip)
                                   : 2.0 * g.constants().eta / (g.constants().lip * g.constants().lip);
          out["checks"]["alpha_admissible"] = alpha > 0.0 && alpha < bound;
        }
      },
      any);
  if (spec.scheme == Scheme::DistPgr) {
    const auto* game = std::get_if<AggregativeGame>(&any);
    if (!game) config_error("dist-pgr needs an aggregative (cournot) game");
    const CommGraph graph = build_graph(spec.graph, game->players(), spec.seed);
    const MixingParams mix = mixing_params(graph);
    out["graph"] = Json{{"nodes", graph.nodes()}, {"edges", graph.edges().size()}, {"connected", true},
                        {"beta", mix.beta}, {"theta", mix.theta}};
  }
  if (spec.scheme == Scheme::Pbr) {
    const QuadraticGame q = std::visit(
        [](const auto& g) -> QuadraticGame {
          if constexpr (std::is_same_v<std::decay_t<decltype(g)>, AggregativeGame>) return g.as_quadratic();
          else return g;
        },
        any);
    const double mu = opt_number(spec.solver, "mu", "solver").value_or(PbrConfig{}.mu);
    const ContractionCertificate cert = gamma_matrix(q, mu);
    out["certificate"] = Json{{"mu", mu}, {"a", cert.a}, {"valid", cert.valid()}};
    if (!cert.valid()) {
      std::ostringstream os;
      os << "proximal best-response certificate fails: ||Gamma|| = " << cert.a << " >= 1";
      throw Error(ErrorCategory::InvalidParameter, os.str());
    }
  }
  return out;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) config_error("cannot create output directory " + dir.string());
  if (!result.csv.empty()) {
    std::ofstream f(dir / "trace.csv", std::ios::binary);
    if (!f) config_error("cannot write " + (dir / "trace.csv").string());
    f << result.csv;
  }
  std::ofstream f(dir / "report.json", std::ios::binary);
  if (!f) config_error("cannot write " + (dir / "report.json").string());
  f << result.report.dump(2) << '\n';
}

}  // namespace vsnash
