// dronegame: run, sweep and verify the receding-horizon drone game.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dronegame/cli.hpp"

using namespace dronegame;

namespace {

struct Common {
  std::string scenario;
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "one_on_one, head_on, bottleneck or crossing");
  cmd->add_option("--config", c.config_path, "JSON config file");
  cmd->add_option("--set", c.sets, "key=value override (repeatable)");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--jobs", c.jobs, "concurrent runs (sweep)");
  cmd->add_flag("--strict", c.strict, "fail on solver non-convergence");
}

// Defaults, then the config file, then --scenario/--seed, then --set.
RunConfig resolve(const Common& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) cfg = load_config_file(c.config_path, cfg);
  if (!c.scenario.empty()) {
    cfg.scenario.name = c.scenario;
    cfg.custom.reset();
  }
  if (c.seed) cfg.seed = *c.seed;
  for (const std::string& s : c.sets) apply_override(cfg, s);
  if (!c.out.empty()) cfg.out_dir = c.out;
  cfg.strict = c.strict;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Receding-horizon differential-game simulator for drone flows"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, conv_opts;
  CLI::App* run = app.add_subcommand("run", "simulate one scenario and write its logs");
  add_common(run, run_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "run a grid of parameter values");
  add_common(sweep, sweep_opts);
  std::vector<std::string> vary;
  int reps = 1;
  bool sweep_traj = false;
  sweep->add_option("--vary", vary, "key=v1,v2,... (repeatable)")->required();
  sweep->add_option("--reps", reps, "repetitions per cell (seeds seed, seed+1, ...)");
  sweep->add_flag("--trajectories", sweep_traj, "also write each run's trajectory.csv");

  CLI::App* conv = app.add_subcommand("convergence", "error traces of cold-start solves");
  add_common(conv, conv_opts);
  std::vector<double> a_values;
  conv->add_option("--a", a_values, "relaxation values")->delimiter(',')->required();

  CLI::App* check = app.add_subcommand("check", "finite-difference and brute-force oracles");
  std::uint64_t check_seed = 1;
  int samples = 1000;
  std::string check_out;
  bool negative = false;
  check->add_option("--seed", check_seed, "random seed");
  check->add_option("--samples", samples, "random gradient configurations");
  check->add_option("--out", check_out, "directory for check.json");
  check->add_flag("--negative-control", negative, "use a sign-flipped gradient (must fail)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(resolve(run_opts), std::cout, std::cerr);
    if (*sweep) {
      SweepOptions opts;
      for (const std::string& v : vary) opts.axes.push_back(parse_sweep_axis(v));
      opts.repetitions = reps;
      opts.jobs = sweep_opts.jobs;
      opts.write_trajectories = sweep_traj;
      return cmd_sweep(resolve(sweep_opts), opts, std::cout, std::cerr);
    }
    if (*conv) return cmd_convergence(resolve(conv_opts), a_values, std::cout, std::cerr);
    if (*check) {
      std::optional<std::filesystem::path> dir;
      if (!check_out.empty()) dir = check_out;
      return cmd_check(check_seed, samples, negative, dir, std::cout, std::cerr);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
