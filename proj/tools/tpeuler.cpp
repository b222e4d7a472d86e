// tpeuler: periodic solutions of forced isentropic gas flow in a closed tube.
//
//   tpeuler check    --config run.ini
//   tpeuler run      --config run.ini --forcing.amplitude 0.01
//   tpeuler periodic --config run.ini
//   tpeuler sweep    --config run.ini --axis amplitude --values 0.001,0.002,0.004

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tpeuler/commands.hpp"
#include "tpeuler/config.hpp"

namespace {

struct Invocation {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  bool no_cutoff = false;
  bool freeze_l = false;
  std::string axis;
  std::vector<double> values;
};

void add_common(CLI::App* sub, Invocation& inv) {
  sub->add_option("-c,--config", inv.config_path, "INI configuration file");
  for (const auto& key : tpeuler::config_keys()) {
    sub->add_option("--" + key, inv.overrides[key], "overrides " + key);
  }
  sub->add_flag("--no-cutoff", inv.no_cutoff, "disable the band cutoff and vacuum floor");
  sub->add_flag("--freeze-L", inv.freeze_l, "keep the entropy accumulator out of the band");
}

tpeuler::RunConfig load(const Invocation& inv) {
  std::vector<tpeuler::KeyValues> layers;
  if (!inv.config_path.empty()) layers.push_back(tpeuler::read_ini_file(inv.config_path));
  tpeuler::KeyValues cli;
  for (const auto& [k, v] : inv.overrides) {
    if (!v.empty()) cli[k] = v;
  }
  if (inv.no_cutoff) cli["flags.no_cutoff"] = "true";
  if (inv.freeze_l) cli["flags.freeze_L"] = "true";
  layers.push_back(cli);
  return tpeuler::parse_config(layers);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-periodic isentropic Euler flow: staggered Lax-Friedrichs solver"};
  app.require_subcommand(1);
  Invocation inv;
  auto* check = app.add_subcommand("check", "validate a configuration and print resolved parameters");
  auto* run = app.add_subcommand("run", "integrate one forcing period");
  auto* periodic = app.add_subcommand("periodic", "compute a time-periodic solution");
  auto* sweep = app.add_subcommand("sweep", "run `periodic` over a parameter axis");
  for (auto* sub : {check, run, periodic, sweep}) add_common(sub, inv);
  sweep->add_option("--axis", inv.axis, "n_x, amplitude or gamma")->required();
  sweep->add_option("--values", inv.values, "comma-separated values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ExtrasError& e) {
    app.exit(e);
    return tpeuler::exit_unknown_key;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(tpeuler::exit_range);
  }

  tpeuler::RunConfig cfg;
  try {
    cfg = load(inv);
  } catch (const tpeuler::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code();
  }
  if (check->parsed()) return tpeuler::cmd_check(cfg, std::cout, std::cerr);
  if (run->parsed()) return tpeuler::cmd_run(cfg, std::cout, std::cerr);
  if (periodic->parsed()) return tpeuler::cmd_periodic(cfg, std::cout, std::cerr);
  return tpeuler::cmd_sweep(cfg, inv.axis, inv.values, std::cout, std::cerr);
}
