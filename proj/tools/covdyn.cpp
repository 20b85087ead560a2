#include <CLI11.hpp>

#include "covdyn/scenario/commands.hpp"

int main(int argc, char** argv) {
  namespace sc = covdyn::scenario;
  CLI::App app{"Unitary dynamics on Hermitian vector bundles"};
  app.require_subcommand(1);
  app.footer(std::string("Outputs go to $") + sc::kOutputDirEnv + " (default: the working directory).\n"
             "Exit codes: 0 ok, 1 invariant failure, 2 configuration error.");

  std::string config, param, values;
  auto* run = app.add_subcommand("run", "Evolve the scenario and write the trajectory CSV and summary");
  auto* check = app.add_subcommand("check", "Evaluate every invariant against the configured model");
  auto* compare = app.add_subcommand("compare", "Compare representations, switch protocols and switch times");
  auto* sweep = app.add_subcommand("sweep", "Run the scenario once per value of one parameter");
  for (auto* sub : {run, check, compare, sweep}) sub->add_option("config", config, "Scenario JSON file")->required();
  sweep->add_option("--param", param, "Dotted config key, e.g. params.epsilon")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? sc::kExitOk : sc::kExitConfigError;
  }
  if (*run) return sc::cmd_run(config);
  if (*check) return sc::cmd_check(config);
  if (*compare) return sc::cmd_compare(config);
  return sc::cmd_sweep(config, param, values);
}
