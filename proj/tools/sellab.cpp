// sellab: batch driver for the semilinear elliptic toolkit.
//
//   sellab [--config FILE] [--out DIR] [--jobs N] [--verbose] [command] [key=value ...]

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sellab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Radial solvers, blow-up rates and bifurcation sweeps for semilinear elliptic problems"};
  std::string config, out_dir = ".", command;
  int jobs = 0;
  long seed = 0;
  bool verbose = false;
  std::vector<std::string> overrides;

  app.add_option("--config", config, "problem configuration (INI)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "worker threads (0 = OpenMP default)")->envname("SEL_LAB_JOBS");
  auto* seed_opt = app.add_option("--seed", seed, "reserved; core paths are deterministic");
  app.add_flag("--verbose", verbose, "list written files");
  app.add_option("command", command, "subcommand; overrides problem.command");
  app.add_option("overrides", overrides, "key=value or section.key=value");
  app.footer("commands: check-ko classify analyze-f ell make-k profile xi0 chi solve-entire\n"
             "          solve-system blowup rate eigen lef sweep gelfand young\n"
             "radial functions use the variable t for r.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  // A bare key=value in the command slot is an override.
  if (command.find('=') != std::string::npos) {
    overrides.insert(overrides.begin(), command);
    command.clear();
  }

  using namespace sellab::cli;
  ProblemSpec spec;
  try {
    if (!config.empty()) spec = parse_config(config);
    if (!command.empty()) spec.command = command;
    for (const std::string& o : overrides) apply_override(spec, o);
    validate(spec);
    if (spec.has("output", "dir") && app.count("--out") == 0) out_dir = spec.text("output", "dir");
    std::filesystem::create_directories(out_dir);
  } catch (const sellab::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  RunOptions opt;
  opt.out_dir = out_dir;
  opt.jobs = jobs;
  opt.verbose = verbose;
  if (seed_opt->count() > 0) opt.seed = seed;
  return run(spec, opt, std::cout, std::cerr);
}
