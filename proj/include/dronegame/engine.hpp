// Receding-horizon simulation: solve the joint game at every control
// instant, let each drone fly its own first control period, replan.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dronegame/core.hpp"
#include "dronegame/solver.hpp"

namespace dronegame {

struct WorldState {
  double time = 0.0;
  std::vector<DroneState> states;
  std::vector<bool> arrived;

  static WorldState initial(std::span<const DroneSpec> specs);
};

/// One realized sample: state at `t`, control applied on [t, t + dt).
/// The arrival sample carries u = 0 and is the drone's last sample.
struct Sample {
  double t = 0.0;
  Vec3 r;
  Vec3 v;
  Vec3 u;
  bool arrived = false;
};

struct SolveSummary {
  double t = 0.0;
  int active = 0;
  int iterations = 0;
  double final_error = 0.0;
  bool converged = true;
};

struct StepResult {
  WorldState world;
  /// Realized samples of this control period, indexed by drone.
  std::vector<std::vector<Sample>> samples;
  SolveResult solve;  // over the active drones only
  std::vector<std::size_t> active;
  CoStates warm;  // full drone count, shifted by one control period
};

/// Solves from the current world, applies the first control period and
/// advances time. Arrived drones stay put and are invisible to the others.
StepResult receding_horizon_step(const WorldState& world, std::span<const DroneSpec> specs,
                                 std::span<const Obstacle> obstacles, const ModelParams& params,
                                 const std::optional<CoStates>& warm = std::nullopt);

/// Co-states moved `shift` grid steps earlier, zero-padded at the tail.
CoStates shift_costates(const CoStates& c, int shift);

struct SimulationLog {
  std::string scenario;
  ModelParams params;
  std::uint64_t seed = 0;
  double t_max = 0.0;
  std::vector<DroneSpec> specs;
  std::vector<std::vector<Sample>> tracks;  // per drone, time ordered
  std::vector<std::optional<double>> arrival_time;
  std::vector<SolveSummary> solves;
  bool failed = false;
  std::string failure;

  bool all_converged() const;
};

struct ScenarioConfig;

/// Runs until every drone has arrived or t >= t_max. A numerical blowup
/// ends the run early with `failed` set; the partial log is returned.
SimulationLog simulate(const ScenarioConfig& scenario, const ModelParams& params,
                       std::uint64_t seed);

}  // namespace dronegame
