// fracvar: command-line driver for the nonlocal variational solvers.
//
//   fracvar <command> [--config FILE] [--key value ...]
//
// Keys given on the command line override the config file.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>

#include "fracvar/errors.hpp"
#include "fracvar/run.hpp"

namespace {

const std::map<std::string, std::string> kDescriptions = {
    {"solve-p2", "mountain-pass solution of the problem with source"},
    {"homotopy", "source -> 0 homotopy on the unit L^q sphere"},
    {"sphere-min", "minimize the energy on the unit L^q sphere"},
    {"capacity", "(s,q)-capacity upper bound of a compact set"},
    {"geometry", "lambda_1, r0, F profile and sphere sampling"},
    {"check-kernel", "sample the Phi and kernel bounds"},
    {"validate", "dry-run constraint report"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal variational problems with Phi-growth operators on an interval"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> overrides;
  for (const auto& name : fracvar::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, kDescriptions.at(name));
    sub->add_option("--config", config_path, "key = value configuration file");
    for (const auto& key : fracvar::config_keys())
      sub->add_option("--" + key, overrides[key], fracvar::config_help(key));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fracvar::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  fracvar::RunConfig cfg;
  try {
    if (!config_path.empty()) fracvar::load_config_file(cfg, config_path);
    for (const auto& key : fracvar::config_keys())
      if (sub->count("--" + key) > 0) fracvar::set_option(cfg, key, overrides[key]);
  } catch (const fracvar::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fracvar::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fracvar::kExitConfig;
  }
  return fracvar::run(sub->get_name(), cfg, std::cout, std::cerr);
}
