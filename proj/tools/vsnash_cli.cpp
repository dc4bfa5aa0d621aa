// Command-line driver: runs one experiment configuration and writes
// trace.csv / report.json, or checks a configuration's assumptions.

#include "vsnash/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

// 0 success, 1 unexpected or all-replications failure, 3.. by error category.
// Command-line usage errors keep CLI11's exit codes.
int exit_code(vsnash::ErrorCategory c) { return 3 + static_cast<int>(c); }

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replications;
  bool quiet = false;
};

int run(const std::string& command, const Options& opt) {
  using namespace vsnash;
  ExperimentSpec spec = load_experiment_spec(opt.config);
  if (command != "validate" && parse_scheme(command) != spec.scheme)
    throw Error(ErrorCategory::Config, std::string("config scheme '") + scheme_name(spec.scheme) +
                                           "' does not match subcommand '" + command + "'");
  if (opt.seed) spec.seed = *opt.seed;
  if (opt.replications) {
    if (*opt.replications == 0) throw Error(ErrorCategory::Config, "--replications must be >= 1");
    spec.replications = *opt.replications;
  }

  if (command == "validate") {
    const Json checks = validate_experiment(spec);
    if (!opt.quiet) std::cout << checks.dump(2) << '\n';
    return 0;
  }

  const ExperimentResult result = run_experiment(spec);
  write_outputs(result, opt.out);
  const std::string status = result.report.value("status", "ok");
  if (!opt.quiet) {
    std::cout << scheme_name(spec.scheme) << ": " << status;
    if (result.report.contains("fit") && result.report["fit"].contains("slope"))
      std::cout << ", fitted slope " << result.report["fit"]["slope"].get<double>() << " vs theory "
                << result.report["theory"]["log_rate"].get<double>();
    std::cout << " -> " << opt.out << '\n';
  }
  if (status == "failed") {
    const auto& f = result.report["failed_replications"].front();
    std::cerr << "error [" << f["category"].get<std::string>() << "]: "
              << f["message"].get<std::string>() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable sample-size Nash equilibrium solvers"};
  app.require_subcommand(1);
  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"pgr", "proximal gradient response with growing batches"},
      {"dist-pgr", "distributed gradient response on a communication graph"},
      {"pbr", "proximal best response with growing batches"},
      {"bounds", "evaluate rate and complexity bounds"},
      {"validate", "check game and graph assumptions"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "experiment JSON document")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--replications", opt.replications, "override the replication count");
    sub->add_flag("--quiet", opt.quiet, "suppress console output");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return run(command, opt);
  } catch (const vsnash::Error& e) {
    std::cerr << "error [" << vsnash::category_name(e.category()) << "]: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
