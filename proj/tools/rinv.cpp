// Command-line front end:
//
//   rinv <solve|branch|census|verify-tame|nashmoser|uniqueness>
//        [--config <path>] [--seed <int>] [--out <dir>]
//
// Exit status: 0 success, 2 configuration error, 3 target outside the
// admissible radius, 4 non-convergence, 5 oracle failure.

#include <rinv/config.hpp>
#include <rinv/error.hpp>
#include <rinv/runner.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Right-inverse solvers on tame scales"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;

  for (const char* name : {"solve", "branch", "census", "verify-tame", "nashmoser", "uniqueness"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Seed for randomized inputs (overrides the config)");
    sub->add_option("--out", out_dir, "Directory for CSV artifacts (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    rinv::RunConfig cfg = config_path.empty() ? rinv::RunConfig{} : rinv::load_run_config(config_path);
    const rinv::Command requested = rinv::parse_command(command);
    if (!config_path.empty() && cfg.command != requested) {
      // An explicit "command" key must agree with the subcommand.
      std::ifstream in(config_path);
      const auto doc = nlohmann::json::parse(in);
      if (doc.contains("command")) {
        rinv::fail(rinv::Errc::config, "config field 'command': '" +
                                           doc.at("command").get<std::string>() +
                                           "' does not match subcommand '" + command + "'");
      }
    }
    cfg.command = requested;
    if (seed) {
      cfg.seed = *seed;
      cfg.nash_moser.seed = *seed;
    }
    if (out_dir) cfg.output = *out_dir;
    rinv::run_command(cfg, std::cout);
  } catch (const rinv::Error& e) {
    std::cerr << "rinv " << command << ": " << rinv::to_string(e.code()) << ": " << e.what()
              << '\n';
    return rinv::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "rinv " << command << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
