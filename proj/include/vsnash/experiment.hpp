#pragma once

#include "vsnash/consensus.hpp"
#include "vsnash/game.hpp"
#include "vsnash/oracle.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace vsnash {

using Json = nlohmann::json;

enum class Scheme { Pgr, DistPgr, Pbr, Bounds };

const char* scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

using AnyGame = std::variant<QuadraticGame, AggregativeGame>;

/// Parsed experiment configuration. The sub-documents are checked for unknown
/// keys and value types at parse time and interpreted by run_experiment.
struct ExperimentSpec {
  Scheme scheme = Scheme::Pgr;
  std::uint64_t seed = 0;
  std::uint64_t replications = 1;
  Json game;      // required except for the bounds scheme
  Json noise;     // default {"type": "zero"}
  Json graph;     // dist-pgr only
  Json solver;    // scheme-specific
  Json analysis;  // fit window, eps, slope tolerance
  Json bounds;    // bounds scheme only
};

/// Throws Error(Config) on unknown keys, wrong types or missing fields.
ExperimentSpec parse_experiment_spec(const Json& doc);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

AnyGame build_game(const Json& game_doc, std::uint64_t default_seed);
NoiseModel build_noise(const Json& noise_doc);
CommGraph build_graph(const Json& graph_doc, Index players, std::uint64_t default_seed);

Json game_to_json(const QuadraticGame& game);
Json game_to_json(const AggregativeGame& game);
Json regularizer_to_json(const Regularizer& r);

struct ExperimentResult {
  Json report;
  std::string csv;  // empty for the bounds scheme
};

/// Builds the game, computes the reference equilibrium, runs the replications
/// and evaluates the bounds. Failed replications are listed in the report.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Assumption checks for the game and, when present, the graph.
Json validate_experiment(const ExperimentSpec& spec);

/// Writes trace.csv (when non-empty) and report.json into `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// Shortest round-trip decimal form used in CSV output.
std::string format_double(double v);

}  // namespace vsnash
