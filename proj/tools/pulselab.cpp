#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pulselab.hpp"

namespace {

int dispatch(const std::string& command, const std::string& config_path, const std::string& out,
             unsigned threads, bool verbose) {
  using namespace pulselab;
  RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config(config_path);
  if (config_path.empty()) validate(cfg);
  app::Context ctx;
  ctx.out = out.empty() ? std::filesystem::path(cfg.output) : std::filesystem::path(out);
  ctx.threads = threads;
  ctx.verbose = verbose;
  if (!out.empty()) cfg.output = out;
  const auto outcome = app::run_command(command, cfg, ctx);
  return outcome.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"pulselab: stationary states, traveling pulses and their dynamics"};
  cli.require_subcommand(1);
  std::string config, out;
  unsigned threads = 1;
  bool verbose = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"stationary", "stationary profile CSV"},
      {"pulse", "wave speed and traveling profile"},
      {"threshold", "critical stiffness over the epsilon list"},
      {"simulate", "time integration, trajectory CSV"},
      {"sweep", "bifurcation sweep over the eta grid"},
      {"stability", "perturbation decay experiments"},
      {"oracle", "independent cross-checks"},
      {"run", "run experiment.type from the config"}};
  for (const auto& [name, help] : commands) {
    auto* sub = cli.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides config output)");
    sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", verbose, "progress on stderr");
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : pulselab::app::kExitUsage;
  }

  const std::string command = cli.get_subcommands().front()->get_name();
  try {
    return dispatch(command, config, out, threads, verbose);
  } catch (const pulselab::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pulselab::app::kExitUsage;
  } catch (const pulselab::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pulselab::app::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pulselab::app::kExitAssertion;
  }
}
