// modgame: equilibria, trajectories, basins, phase portraits and regime
// sweeps for the user/moderator evolutionary game.

#include <array>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "modgame/commands.hpp"

namespace {

struct Flag {
  const char* name;  // command-line spelling
  const char* key;   // config key
  const char* help;
};

constexpr std::array kFlags{
    Flag{"--model", "model", "standard | incentives | epidemic"},
    Flag{"--np", "np", "proportion of ordinary users, in (0,1)"},
    Flag{"--a", "a", "punishment (or incentive) scale, > 0"},
    Flag{"--beta", "beta", "epidemic conversion rate"},
    Flag{"--rho", "rho", "epidemic reversion rate"},
    Flag{"--mu", "mu", "epidemic turnover rate"},
    Flag{"--lambda", "lambda", "epidemic inflow rate (defaults to mu)"},
    Flag{"--x0", "x0", "initial cooperating-user fraction"},
    Flag{"--z0", "z0", "initial positive-moderator fraction"},
    Flag{"--T", "T", "simulation horizon"},
    Flag{"--dt", "dt", "RK4 step"},
    Flag{"--t-max", "t_max", "omega-limit integration cap"},
    Flag{"--stride", "stride", "trajectory output stride (steps per row)"},
    Flag{"--grid", "grid", "grid resolution per axis"},
    Flag{"--np-min", "np_min", "sweep: lowest n_p"},
    Flag{"--np-max", "np_max", "sweep: highest n_p"},
    Flag{"--np-steps", "np_steps", "sweep: n_p samples"},
    Flag{"--a-min", "a_min", "sweep: lowest a"},
    Flag{"--a-max", "a_max", "sweep: highest a"},
    Flag{"--a-steps", "a_steps", "sweep: a samples"},
    Flag{"--out", "out", "primary output file"},
    Flag{"--svg", "svg", "portrait: also render an SVG to this path"},
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw modgame::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary game of ordinary users and moderators"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "flat key = value scenario file");
  std::array<std::string, kFlags.size()> values;
  std::array<CLI::Option*, kFlags.size()> options{};
  for (std::size_t i = 0; i < kFlags.size(); ++i) {
    options[i] = app.add_option(kFlags[i].name, values[i], kFlags[i].help);
  }

  auto* equilibria = app.add_subcommand("equilibria", "list the nine candidate equilibria");
  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory");
  auto* basin = app.add_subcommand("basin", "label a grid of initial states by omega-limit");
  auto* portrait = app.add_subcommand("portrait", "sample the vector field (optionally as SVG)");
  auto* sweep = app.add_subcommand("sweep", "stability regimes over an (n_p, a) grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? modgame::kExitOk : modgame::kExitConfig;
  }

  modgame::ScenarioConfig cfg;
  try {
    if (!config_path.empty()) cfg = modgame::parse_config(read_text(config_path));
    for (std::size_t i = 0; i < kFlags.size(); ++i) {
      if (options[i]->count() > 0) modgame::set_key(cfg, kFlags[i].key, values[i]);
    }
    modgame::validate(cfg);
  } catch (const modgame::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return modgame::kExitConfig;
  }

  try {
    if (*equilibria) modgame::cmd_equilibria(cfg, std::cout);
    else if (*simulate) modgame::cmd_simulate(cfg, std::cout);
    else if (*basin) modgame::cmd_basin(cfg, std::cout);
    else if (*portrait) modgame::cmd_portrait(cfg, std::cout);
    else if (*sweep) modgame::cmd_sweep(cfg, std::cout);
  } catch (const modgame::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return modgame::kExitConfig;
  } catch (const modgame::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return modgame::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return modgame::kExitRuntime;
  }
  return modgame::kExitOk;
}
