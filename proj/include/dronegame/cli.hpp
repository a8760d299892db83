// Subcommands behind the dronegame executable. Each returns the process
// exit status and reports on the given streams.
#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dronegame/io.hpp"
#include "dronegame/solver.hpp"

namespace dronegame {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,         // blowup, failed check, I/O error
  kExitConfig = 2,          // rejected before anything ran
  kExitNonConvergence = 3,  // only with --strict
};

struct RunOutcome {
  ScenarioConfig scenario;
  SimulationLog log;
  MetricsReport metrics;
  nlohmann::json meta;
};

/// Builds the scenario and simulates it.
RunOutcome run_once(const RunConfig& config);

/// Writes trajectory.csv, crossings.csv, metrics.json and solves.json.
void write_run_outputs(const RunOutcome& outcome, const std::filesystem::path& dir,
                       bool with_trajectory = true);

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

struct SweepOptions {
  std::vector<SweepAxis> axes;
  int repetitions = 1;
  int jobs = 1;
  bool write_trajectories = false;
  bool write_files = true;
};

struct SweepCell {
  std::vector<std::pair<std::string, std::string>> assignment;
  int runs = 0;
  int failed = 0;
  std::optional<double> min_pairwise_distance;  // mean over runs
  double avg_directed_speed = 0.0;               // mean over runs
  std::optional<double> lane_separation;         // mean over runs that have one
  int nonconverged_solves = 0;
  std::vector<MetricsReport> reports;  // per repetition
};

/// "key=v1,v2,..." as a sweep axis.
SweepAxis parse_sweep_axis(std::string_view text);

/// Cartesian product of the axes, `repetitions` runs per cell with seeds
/// base.seed + rep. Cells run concurrently on up to `jobs` threads; the
/// result is in cell order whatever the thread count. Throws ConfigError
/// before running anything if a cell is invalid.
std::vector<SweepCell> run_sweep(const RunConfig& base, const SweepOptions& options);

std::string format_sweep_table(const std::vector<SweepCell>& cells,
                               const std::vector<SweepAxis>& axes);

int cmd_sweep(const RunConfig& base, const SweepOptions& options, std::ostream& out,
              std::ostream& err);

struct ConvergenceTrace {
  double a = 0.0;
  FixedPointTrace result;
};

/// One cold-start solve of the scenario's initial state per value of a.
std::vector<ConvergenceTrace> run_convergence(const RunConfig& config,
                                              std::span<const double> a_values);

int cmd_convergence(const RunConfig& config, const std::vector<double>& a_values,
                    std::ostream& out, std::ostream& err);

/// Runs the oracle suite. `negative_control` swaps in a sign-flipped
/// position gradient, which must make the command fail.
int cmd_check(std::uint64_t seed, int gradient_samples, bool negative_control,
              const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
              std::ostream& err);

}  // namespace dronegame
