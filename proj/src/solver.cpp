#include "dronegame/solver.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "dronegame/cost.hpp"

namespace dronegame {

namespace {

constexpr double kBlowupMagnitude = 1e12;

void check_finite(const Vec3& value, const char* what, std::size_t drone, int k) {
  if (!is_finite(value) || max_abs(value) > kBlowupMagnitude) {
    std::ostringstream msg;
    msg << "numerical blowup in " << what << " (drone " << drone << ", step " << k << ")";
    throw NumericalBlowup(msg.str());
  }
}

}  // namespace

JointTrajectory forward_sweep(std::span<const DroneState> initial, const CoStates& costates,
                              const HorizonGrid& grid) {
  const std::size_t n = initial.size();
  const auto steps = static_cast<std::size_t>(grid.n_steps);
  if (costates.drone_count() != n) {
    throw ConfigError("forward_sweep: co-state drone count does not match initial states");
  }
  JointTrajectory t;
  t.grid = grid;
  t.r.assign(n, std::vector<Vec3>(steps + 1));
  t.v.assign(n, std::vector<Vec3>(steps + 1));
  t.u.assign(n, std::vector<Vec3>(steps));
  t.lambda_r = costates.lambda_r;
  t.lambda_v = costates.lambda_v;
  for (std::size_t i = 0; i < n; ++i) {
    if (costates.lambda_v[i].size() != steps + 1 || costates.lambda_r[i].size() != steps + 1) {
      throw ConfigError("forward_sweep: co-state length does not match grid");
    }
    check_finite(initial[i].position, "initial position", i, 0);
    check_finite(initial[i].velocity, "initial velocity", i, 0);
    auto& r = t.r[i];
    auto& v = t.v[i];
    auto& u = t.u[i];
    r[0] = initial[i].position;
    v[0] = initial[i].velocity;
    for (std::size_t k = 0; k < steps; ++k) {
      u[k] = optimal_control(costates.lambda_v[i][k]);
      v[k + 1] = v[k] + grid.dt * u[k];
      r[k + 1] = r[k] + grid.dt * v[k];
      check_finite(v[k + 1], "forward sweep", i, static_cast<int>(k + 1));
      check_finite(r[k + 1], "forward sweep", i, static_cast<int>(k + 1));
    }
  }
  return t;
}

CoStates backward_sweep(const JointTrajectory& states, std::span<const DroneSpec> specs,
                        std::span<const Obstacle> obstacles, const ModelParams& params) {
  const HorizonGrid& g = states.grid;
  const std::size_t n = states.drone_count();
  if (specs.size() != n) throw ConfigError("backward_sweep: spec count does not match states");
  CoStates c = CoStates::zeros(n, g);
  std::vector<Vec3> positions(n);
  for (int k = g.n_steps; k >= 1; --k) {
    for (std::size_t j = 0; j < n; ++j) positions[j] = states.r[j][k];
    const double discount = params.eta == 0.0 ? 1.0 : std::exp(-params.eta * g.time(k - 1));
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 v_des = desired_velocity(states.r[i][k], specs[i].target, specs[i].desired_speed,
                                          params.braking_time, params.d_min);
      const Vec3 gr = discount * grad_running_cost_r(i, positions, obstacles, params);
      const Vec3 gv = discount * grad_running_cost_v(states.v[i][k], v_des, params.alpha);
      c.lambda_r[i][k - 1] = c.lambda_r[i][k] + g.dt * gr;
      c.lambda_v[i][k - 1] = c.lambda_v[i][k] + g.dt * (gv + c.lambda_r[i][k]);
      check_finite(c.lambda_r[i][k - 1], "backward sweep", i, k - 1);
      check_finite(c.lambda_v[i][k - 1], "backward sweep", i, k - 1);
    }
  }
  return c;
}

CoStates relax(const CoStates& prev, const CoStates& next, double a) {
  if (a == 1.0) return next;
  CoStates out = prev;
  const double keep = 1.0 - a;
  const auto blend = [&](Series& dst, const Series& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) {
      for (std::size_t k = 0; k < dst[i].size(); ++k) {
        dst[i][k] = keep * dst[i][k] + a * src[i][k];
      }
    }
  };
  blend(out.lambda_r, next.lambda_r);
  blend(out.lambda_v, next.lambda_v);
  return out;
}

double iteration_error(const CoStates& a, const CoStates& b) {
  double err = 0.0;
  const auto sup = [&err](const Series& x, const Series& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t k = 0; k < x[i].size(); ++k) {
        err = std::fmax(err, max_abs(x[i][k] - y[i][k]));
      }
    }
  };
  sup(a.lambda_r, b.lambda_r);
  sup(a.lambda_v, b.lambda_v);
  return err;
}

namespace {

void check_solve_inputs(std::span<const DroneSpec> specs, std::span<const DroneState> initial,
                        const ModelParams& params) {
  params.validate();
  if (specs.empty()) throw ConfigError("solve_game needs at least one drone");
  if (specs.size() != initial.size()) {
    throw ConfigError("solve_game: one initial state per drone spec is required");
  }
}

// One relaxed fixed-point step; returns the residual before relaxation.
double iterate(CoStates& current, std::span<const DroneSpec> specs,
               std::span<const DroneState> initial, std::span<const Obstacle> obstacles,
               const HorizonGrid& grid, const ModelParams& params) {
  const JointTrajectory states = forward_sweep(initial, current, grid);
  const CoStates fresh = backward_sweep(states, specs, obstacles, params);
  const double err = iteration_error(current, fresh);
  current = relax(current, fresh, params.relaxation_a);
  return err;
}

}  // namespace

SolveResult solve_game(std::span<const DroneSpec> specs, std::span<const DroneState> initial,
                       std::span<const Obstacle> obstacles, const HorizonGrid& grid,
                       const ModelParams& params, const std::optional<CoStates>& warm_start) {
  check_solve_inputs(specs, initial, params);
  CoStates current = warm_start ? *warm_start : CoStates::zeros(specs.size(), grid);

  SolveResult result;
  for (int it = 0; it < params.max_iters; ++it) {
    const double err = iterate(current, specs, initial, obstacles, grid, params);
    result.trace.push_back(err);
    if (err <= params.eps) break;
  }
  result.iterations = static_cast<int>(result.trace.size());
  result.final_error = result.trace.back();
  result.converged = result.final_error <= params.eps;
  result.trajectory = forward_sweep(initial, current, grid);
  return result;
}

FixedPointTrace trace_fixed_point(std::span<const DroneSpec> specs,
                                  std::span<const DroneState> initial,
                                  std::span<const Obstacle> obstacles, const HorizonGrid& grid,
                                  const ModelParams& params) {
  check_solve_inputs(specs, initial, params);
  CoStates current = CoStates::zeros(specs.size(), grid);
  FixedPointTrace out;
  try {
    for (int it = 0; it < params.max_iters; ++it) {
      const double err = iterate(current, specs, initial, obstacles, grid, params);
      out.trace.push_back(err);
      if (err <= params.eps) {
        out.converged = true;
        break;
      }
    }
  } catch (const NumericalBlowup& e) {
    out.blew_up = true;
    out.failure = e.what();
  }
  return out;
}

std::pair<Vec3, Vec3> initial_state_sensitivity(const JointTrajectory& traj, std::size_t i) {
  // One more backward step: the fixed initial state carries no running cost.
  const Vec3 lr = traj.lambda_r[i][0];
  const Vec3 lv = traj.lambda_v[i][0] + traj.grid.dt * lr;
  return {lr, lv};
}

}  // namespace dronegame
