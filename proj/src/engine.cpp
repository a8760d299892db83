#include "dronegame/engine.hpp"

#include <cmath>

#include "dronegame/scenarios.hpp"

namespace dronegame {

WorldState WorldState::initial(std::span<const DroneSpec> specs) {
  WorldState w;
  w.states.reserve(specs.size());
  for (const DroneSpec& s : specs) w.states.push_back(s.initial);
  w.arrived.assign(specs.size(), false);
  return w;
}

CoStates shift_costates(const CoStates& c, int shift) {
  CoStates out = c;
  const auto move = [shift](std::vector<Vec3>& series) {
    const auto len = static_cast<int>(series.size());
    for (int k = 0; k < len; ++k) {
      series[k] = k + shift < len ? series[k + shift] : Vec3{};
    }
  };
  for (auto& s : out.lambda_r) move(s);
  for (auto& s : out.lambda_v) move(s);
  return out;
}

namespace {

bool within_arrival(const DroneState& s, const DroneSpec& spec, double radius) {
  return norm(spec.target - s.position) <= radius;
}

}  // namespace

StepResult receding_horizon_step(const WorldState& world, std::span<const DroneSpec> specs,
                                 std::span<const Obstacle> obstacles, const ModelParams& params,
                                 const std::optional<CoStates>& warm) {
  params.validate();
  const std::size_t n = specs.size();
  const HorizonGrid grid = make_grid(world.time, params.horizon_T, params.dt);
  const int steps = params.steps_per_control();

  StepResult out;
  out.world = world;
  out.samples.resize(n);
  out.warm = CoStates::zeros(n, grid);

  for (std::size_t i = 0; i < n; ++i) {
    if (!world.arrived[i]) out.active.push_back(i);
  }
  if (out.active.empty()) {
    out.world.time = world.time + steps * params.dt;
    out.solve.converged = true;
    return out;
  }

  std::vector<DroneSpec> sub_specs;
  std::vector<DroneState> sub_states;
  std::optional<CoStates> sub_warm;
  if (warm) sub_warm.emplace();
  for (std::size_t i : out.active) {
    sub_specs.push_back(specs[i]);
    sub_states.push_back(world.states[i]);
    if (warm) {
      sub_warm->lambda_r.push_back(warm->lambda_r[i]);
      sub_warm->lambda_v.push_back(warm->lambda_v[i]);
    }
  }
  out.solve = solve_game(sub_specs, sub_states, obstacles, grid, params, sub_warm);
  const JointTrajectory& plan = out.solve.trajectory;

  // Drones fly their own first control period open loop, with the same
  // Euler update as the planner.
  for (int s = 0; s < steps; ++s) {
    const double t = world.time + s * params.dt;
    for (std::size_t a = 0; a < out.active.size(); ++a) {
      const std::size_t i = out.active[a];
      if (out.world.arrived[i]) continue;
      DroneState& st = out.world.states[i];
      const Vec3 u = s < grid.n_steps ? plan.u[a][s] : Vec3{};
      out.samples[i].push_back(Sample{t, st.position, st.velocity, u, false});
      const Vec3 v_old = st.velocity;
      st.velocity = v_old + params.dt * u;
      st.position = st.position + params.dt * v_old;
      if (within_arrival(st, specs[i], params.arrival_radius)) {
        out.world.arrived[i] = true;
        out.samples[i].push_back(Sample{t + params.dt, st.position, st.velocity, Vec3{}, true});
      }
    }
  }
  out.world.time = world.time + steps * params.dt;

  const CoStates shifted = shift_costates(
      CoStates{plan.lambda_r, plan.lambda_v}, steps);
  for (std::size_t a = 0; a < out.active.size(); ++a) {
    out.warm.lambda_r[out.active[a]] = shifted.lambda_r[a];
    out.warm.lambda_v[out.active[a]] = shifted.lambda_v[a];
  }
  return out;
}

bool SimulationLog::all_converged() const {
  for (const SolveSummary& s : solves) {
    if (!s.converged) return false;
  }
  return true;
}

SimulationLog simulate(const ScenarioConfig& scenario, const ModelParams& params,
                       std::uint64_t seed) {
  scenario.validate();
  params.validate();
  SimulationLog log;
  log.scenario = scenario.name;
  log.params = params;
  log.seed = seed;
  log.t_max = scenario.t_max;
  log.specs = scenario.drones;
  const std::size_t n = scenario.drones.size();
  log.tracks.resize(n);
  log.arrival_time.resize(n);
  if (n == 0) return log;

  WorldState world = WorldState::initial(scenario.drones);
  for (std::size_t i = 0; i < n; ++i) {
    if (within_arrival(world.states[i], scenario.drones[i], params.arrival_radius)) {
      world.arrived[i] = true;
      log.arrival_time[i] = 0.0;
      log.tracks[i].push_back(
          Sample{0.0, world.states[i].position, world.states[i].velocity, Vec3{}, true});
    }
  }

  std::optional<CoStates> warm;
  const auto all_arrived = [&world] {
    for (bool a : world.arrived) {
      if (!a) return false;
    }
    return true;
  };
  try {
    while (!all_arrived() && world.time < scenario.t_max - 1e-9) {
      StepResult step = receding_horizon_step(world, scenario.drones, scenario.obstacles, params,
                                              params.warm_start ? warm : std::nullopt);
      log.solves.push_back(SolveSummary{world.time, static_cast<int>(step.active.size()),
                                        step.solve.iterations, step.solve.final_error,
                                        step.solve.converged});
      for (std::size_t i = 0; i < n; ++i) {
        for (const Sample& s : step.samples[i]) {
          log.tracks[i].push_back(s);
          if (s.arrived) log.arrival_time[i] = s.t;
        }
      }
      world = std::move(step.world);
      warm = std::move(step.warm);
    }
  } catch (const NumericalBlowup& e) {
    log.failed = true;
    log.failure = e.what();
  }
  // Closing sample at the last good state, also after a blowup.
  for (std::size_t i = 0; i < n; ++i) {
    if (!world.arrived[i]) {
      log.tracks[i].push_back(
          Sample{world.time, world.states[i].position, world.states[i].velocity, Vec3{}, false});
    }
  }
  return log;
}

}  // namespace dronegame
