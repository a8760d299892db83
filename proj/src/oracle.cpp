#include "dronegame/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dronegame/cost.hpp"
#include "dronegame/solver.hpp"

namespace dronegame {

namespace {

constexpr double kGradientStep = 1e-5;
constexpr double kGradientTolerance = 1e-5;
constexpr double kAdjointTolerance = 1e-3;
constexpr double kStationarityStep = 1e-4;
constexpr double kStationarityTolerance = 1e-3;
constexpr int kMaxBestResponseRounds = 100;

double& component(Vec3& v, int axis) { return axis == 0 ? v.x : axis == 1 ? v.y : v.z; }

std::array<double, 3> as_array(const Vec3& v) { return {v.x, v.y, v.z}; }

Vec3 random_vec(UniformSource& rng, double lo, double hi) {
  return {rng(lo, hi), rng(lo, hi), rng(lo, hi)};
}

Obstacle random_obstacle(UniformSource& rng) {
  if (rng(0.0, 1.0) < 0.5) {
    return Obstacle::cylinder(rng(-1.0, 1.0), rng(-1.0, 1.0), rng(0.1, 0.5));
  }
  Vec3 n = random_vec(rng, -1.0, 1.0);
  n = (1.0 / std::max(norm(n), 1e-3)) * n;
  return Obstacle::half_space(n, rng(-1.0, -0.3));
}

CheckReport make_report(std::string name, double worst, double tolerance, int samples) {
  return {std::move(name), worst, tolerance, worst <= tolerance, samples};
}

// Planned states of one drone flying the given controls.
JointTrajectory fly(const DroneState& initial, const std::vector<Vec3>& controls,
                    const HorizonGrid& grid) {
  CoStates cs = CoStates::zeros(1, grid);
  for (std::size_t k = 0; k < controls.size(); ++k) cs.lambda_v[0][k] = -controls[k];
  const std::array<DroneState, 1> init{initial};
  return forward_sweep(init, cs, grid);
}

// Replaces drone i's states and controls in `joint` by the single-drone plan.
void splice(JointTrajectory& joint, std::size_t i, const JointTrajectory& single) {
  joint.r[i] = single.r[0];
  joint.v[i] = single.v[0];
  joint.u[i] = single.u[0];
  joint.lambda_r[i] = single.lambda_r[0];
  joint.lambda_v[i] = single.lambda_v[0];
}

}  // namespace

double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
}

CheckReport fd_cost_gradients(std::uint64_t seed, int n_samples, const ModelParams& params,
                              const PositionGradient& grad_r) {
  if (n_samples < 1) throw ConfigError("fd_cost_gradients needs at least one sample");
  params.validate();
  const PositionGradient analytic_r = grad_r ? grad_r : PositionGradient(grad_running_cost_r);
  UniformSource rng(seed);
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const int n = 2 + static_cast<int>(rng(0.0, 4.0 - 1e-12));
    const int m = static_cast<int>(rng(0.0, 3.0 - 1e-12));
    std::vector<Vec3> positions;
    for (int j = 0; j < n; ++j) positions.push_back(random_vec(rng, -0.4, 0.4));
    std::vector<Obstacle> obstacles;
    for (int j = 0; j < m; ++j) obstacles.push_back(random_obstacle(rng));
    const Vec3 v = random_vec(rng, -1.0, 1.0);
    const Vec3 v_des = random_vec(rng, -1.0, 1.0);
    const Vec3 u = random_vec(rng, -1.0, 1.0);
    const auto i = static_cast<std::size_t>(rng(0.0, n - 1e-9));

    auto cost_at = [&](const std::vector<Vec3>& pos, const Vec3& vel) {
      return running_cost(i, pos, vel, u, v_des, obstacles, params).total;
    };
    Vec3 fd_r, fd_v;
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<Vec3> plus = positions, minus = positions;
      component(plus[i], axis) += kGradientStep;
      component(minus[i], axis) -= kGradientStep;
      component(fd_r, axis) = (cost_at(plus, v) - cost_at(minus, v)) / (2.0 * kGradientStep);
      Vec3 vp = v, vm = v;
      component(vp, axis) += kGradientStep;
      component(vm, axis) -= kGradientStep;
      component(fd_v, axis) =
          (cost_at(positions, vp) - cost_at(positions, vm)) / (2.0 * kGradientStep);
    }
    const auto a_r = as_array(analytic_r(i, positions, obstacles, params));
    const auto a_v = as_array(grad_running_cost_v(v, v_des, params.alpha));
    const auto f_r = as_array(fd_r);
    const auto f_v = as_array(fd_v);
    worst = std::max({worst, relative_error(a_r, f_r), relative_error(a_v, f_v)});
  }
  return make_report("fd_cost_gradients", worst, kGradientTolerance, n_samples);
}

AdjointCase adjoint_case_cruising() {
  AdjointCase c{"isolated_cruising", {}, {}, {}};
  DroneSpec d;
  d.initial = {{0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  d.target = {100.0, 0.0, 1.0};
  c.specs.push_back(d);
  c.initial.push_back(d.initial);
  return c;
}

AdjointCase adjoint_case_off_speed() {
  AdjointCase c{"isolated_off_speed", {}, {}, {}};
  DroneSpec d;
  d.initial = {{0.0, 0.0, 1.0}, {0.3, 0.2, -0.1}};
  d.target = {50.0, 0.0, 1.0};
  c.specs.push_back(d);
  c.initial.push_back(d.initial);
  return c;
}

AdjointCase adjoint_case_near_miss() {
  AdjointCase c{"pair_near_miss", {}, {}, {}};
  DroneSpec a;
  a.id = 0;
  a.group = 1;
  a.initial = {{-0.5, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  a.target = {50.0, 0.0, 1.0};
  DroneSpec b;
  b.id = 1;
  b.group = 2;
  b.initial = {{0.5, 0.08, 1.02}, {-1.0, 0.0, 0.0}};
  b.target = {-50.0, 0.08, 1.02};
  c.specs = {a, b};
  c.initial = {a.initial, b.initial};
  c.obstacles.push_back(Obstacle::cylinder(0.0, 0.6, 0.4));
  return c;
}

CheckReport fd_adjoint_check(const AdjointCase& c, const ModelParams& params) {
  params.validate();
  const HorizonGrid grid = make_grid(0.0, params.horizon_T, params.dt);
  if (params.dt > 0.01 + 1e-15) throw ConfigError("fd_adjoint_check needs dt <= 0.01");
  if (grid.n_steps > 200) throw ConfigError("fd_adjoint_check needs at most 200 steps");

  // Any control sequence will do; a few relaxation steps give a realistic one.
  ModelParams plan_params = params;
  plan_params.max_iters = std::min(params.max_iters, 30);
  const JointTrajectory traj =
      solve_game(c.specs, c.initial, c.obstacles, grid, plan_params).trajectory;
  const CoStates fresh = backward_sweep(traj, c.specs, c.obstacles, params);
  JointTrajectory priced = traj;
  priced.lambda_r = fresh.lambda_r;
  priced.lambda_v = fresh.lambda_v;
  const CoStates flown{traj.lambda_r, traj.lambda_v};

  double worst = 0.0;
  for (std::size_t i = 0; i < c.specs.size(); ++i) {
    const std::vector<Vec3> v_des = desired_profile(traj, i, c.specs[i], params);
    auto cost_from = [&](const DroneState& start) {
      std::vector<DroneState> init = c.initial;
      init[i] = start;
      return discrete_cost(forward_sweep(init, flown, grid), i, v_des, c.obstacles, params);
    };
    std::array<double, 6> fd{};
    for (int axis = 0; axis < 6; ++axis) {
      DroneState plus = c.initial[i], minus = c.initial[i];
      Vec3& p = axis < 3 ? plus.position : plus.velocity;
      Vec3& q = axis < 3 ? minus.position : minus.velocity;
      component(p, axis % 3) += kGradientStep;
      component(q, axis % 3) -= kGradientStep;
      fd[axis] = (cost_from(plus) - cost_from(minus)) / (2.0 * kGradientStep);
    }
    const auto [dr, dv] = initial_state_sensitivity(priced, i);
    const std::array<double, 6> adj{dr.x, dr.y, dr.z, dv.x, dv.y, dv.z};
    worst = std::max(worst, relative_error(adj, fd));
  }
  return make_report("fd_adjoint_check:" + c.name, worst, kAdjointTolerance,
                     static_cast<int>(c.specs.size()));
}

NashOracleResult brute_force_nash(const NashInstance& instance) {
  const ModelParams& p = instance.params;
  p.validate();
  const std::size_t n = instance.specs.size();
  if (n == 0 || n > 2) throw ConfigError("brute_force_nash takes one or two drones");
  if (instance.levels.empty()) throw ConfigError("brute_force_nash needs control levels");
  const HorizonGrid grid = make_grid(0.0, p.horizon_T, p.dt);
  const int steps = grid.n_steps;
  if (steps > 4) throw ConfigError("brute_force_nash supports at most 4 steps");

  std::size_t combos = 1;
  for (int k = 0; k < steps; ++k) combos *= instance.levels.size();

  // Start from the level closest to zero.
  std::size_t rest = 0;
  for (std::size_t l = 1; l < instance.levels.size(); ++l) {
    if (std::abs(instance.levels[l]) < std::abs(instance.levels[rest])) rest = l;
  }
  auto controls_of = [&](std::size_t code) {
    std::vector<Vec3> u(steps);
    for (int k = 0; k < steps; ++k) {
      u[k] = {instance.levels[code % instance.levels.size()], 0.0, 0.0};
      code /= instance.levels.size();
    }
    return u;
  };
  std::size_t rest_code = 0;
  for (int k = steps - 1; k >= 0; --k) rest_code = rest_code * instance.levels.size() + rest;

  std::vector<DroneState> initial;
  for (const DroneSpec& s : instance.specs) initial.push_back(s.initial);
  JointTrajectory joint = forward_sweep(initial, CoStates::zeros(n, grid), grid);
  std::vector<std::size_t> plan(n, rest_code);
  for (std::size_t i = 0; i < n; ++i) splice(joint, i, fly(initial[i], controls_of(rest_code), grid));

  auto cost_of = [&](const JointTrajectory& t, std::size_t i) {
    return discrete_cost(t, i, std::span<const DroneSpec>(instance.specs), {}, p);
  };

  NashOracleResult out;
  bool changed = true;
  while (changed) {
    if (out.rounds == kMaxBestResponseRounds) {
      throw OracleError("best-response search did not settle within 100 rounds");
    }
    ++out.rounds;
    changed = false;
    // Drones respond in turn; simultaneous responses cycle on the head-on pair.
    for (std::size_t i = 0; i < n; ++i) {
      double best = cost_of(joint, i);
      std::size_t best_code = plan[i];
      JointTrajectory trial = joint;
      for (std::size_t code = 0; code < combos; ++code) {
        splice(trial, i, fly(initial[i], controls_of(code), grid));
        const double c = cost_of(trial, i);
        if (c < best - 1e-12) {
          best = c;
          best_code = code;
        }
      }
      if (best_code != plan[i]) {
        plan[i] = best_code;
        splice(joint, i, fly(initial[i], controls_of(best_code), grid));
        changed = true;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.costs.push_back(cost_of(joint, i));
    std::vector<double> xs;
    for (const Vec3& u : controls_of(plan[i])) xs.push_back(u.x);
    out.controls.push_back(std::move(xs));
  }
  return out;
}

namespace {

NashInstance line_instance(std::string name) {
  NashInstance inst;
  inst.name = std::move(name);
  inst.params.dt = 1.0;
  inst.params.horizon_T = 3.0;
  inst.params.control_period = 1.0;
  inst.params.relaxation_a = 0.02;
  inst.params.eps = 1e-10;
  inst.params.max_iters = 20000;
  return inst;
}

DroneSpec line_drone(int id, double x, double target_x) {
  DroneSpec d;
  d.id = id;
  d.group = id + 1;
  d.initial = {{x, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  d.target = {target_x, 0.0, 0.0};
  return d;
}

}  // namespace

NashInstance nash_instance_single() {
  NashInstance inst = line_instance("single_drone_line");
  inst.specs = {line_drone(0, 0.0, 100.0)};
  return inst;
}

NashInstance nash_instance_head_on() {
  NashInstance inst = line_instance("head_on_pair_line");
  inst.params.horizon_T = 2.0;
  inst.params.dt = 0.5;
  inst.params.control_period = 0.5;
  inst.params.d0 = 0.5;
  inst.specs = {line_drone(0, -1.0, 100.0), line_drone(1, 1.0, -100.0)};
  return inst;
}

NashInstance nash_instance_far_pair() {
  NashInstance inst = line_instance("far_pair_line");
  inst.params.horizon_T = 4.0;
  inst.specs = {line_drone(0, 0.0, 100.0), line_drone(1, 1000.0, 900.0)};
  return inst;
}

CheckReport brute_force_comparison(const NashInstance& instance, double slack) {
  const NashOracleResult oracle = brute_force_nash(instance);
  const ModelParams& p = instance.params;
  const HorizonGrid grid = make_grid(0.0, p.horizon_T, p.dt);
  std::vector<DroneState> initial;
  for (const DroneSpec& s : instance.specs) initial.push_back(s.initial);
  const SolveResult solved = solve_game(instance.specs, initial, {}, grid, p);
  // One-sided: the oracle is confined to the control grid, so the solver
  // may only lose to it by the slack.
  double worst = solved.converged ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < instance.specs.size(); ++i) {
    const double c = discrete_cost(solved.trajectory, i,
                                   std::span<const DroneSpec>(instance.specs), {}, p);
    worst = std::max(worst, c - oracle.costs[i]);
  }
  return make_report("brute_force_nash:" + instance.name, worst, slack,
                     static_cast<int>(instance.specs.size()));
}

CheckReport nash_stationarity_check(std::uint64_t seed, int n_directions,
                                    const ModelParams& params) {
  params.validate();
  UniformSource rng(seed);
  const double y0 = rng(0.02, 0.1);
  std::vector<DroneSpec> specs(2);
  specs[0].id = 0;
  specs[0].group = 1;
  specs[0].initial = {{-3.0, y0, 1.0}, {1.0, 0.0, 0.0}};
  specs[0].target = {20.0, y0, 1.0};
  specs[1].id = 1;
  specs[1].group = 2;
  specs[1].initial = {{3.0, -y0, 1.0}, {-1.0, 0.0, 0.0}};
  specs[1].target = {-20.0, -y0, 1.0};
  const std::vector<DroneState> initial{specs[0].initial, specs[1].initial};
  const HorizonGrid grid = make_grid(0.0, params.horizon_T, params.dt);

  const SolveResult solved = solve_game(specs, initial, {}, grid, params);
  if (!solved.converged) {
    return make_report("nash_stationarity", INFINITY, kStationarityTolerance, 0);
  }
  const JointTrajectory& eq = solved.trajectory;
  const std::vector<Vec3> v_des = desired_profile(eq, 0, specs[0], params);

  double worst = 0.0;
  for (int d = 0; d < n_directions; ++d) {
    std::vector<Vec3> delta(grid.n_steps);
    double sup = 0.0;
    for (Vec3& e : delta) {
      e = random_vec(rng, -1.0, 1.0);
      sup = std::max(sup, max_abs(e));
    }
    for (Vec3& e : delta) e = (1.0 / sup) * e;

    auto cost_at = [&](double step) {
      std::vector<Vec3> u = eq.u[0];
      for (int k = 0; k < grid.n_steps; ++k) u[k] += step * delta[k];
      JointTrajectory t = eq;
      splice(t, 0, fly(initial[0], u, grid));
      return discrete_cost(t, 0, v_des, {}, params);
    };
    const double slope =
        (cost_at(kStationarityStep) - cost_at(-kStationarityStep)) / (2.0 * kStationarityStep);
    worst = std::max(worst, std::abs(slope));
  }
  return make_report("nash_stationarity", worst, kStationarityTolerance, n_directions);
}

std::vector<CheckReport> run_all_checks(std::uint64_t seed, int gradient_samples) {
  std::vector<CheckReport> out;
  out.push_back(fd_cost_gradients(seed, gradient_samples, ModelParams{}));

  ModelParams fine;
  fine.dt = 0.01;
  fine.control_period = 0.01;
  fine.horizon_T = 1.0;
  for (const AdjointCase& c :
       {adjoint_case_cruising(), adjoint_case_off_speed(), adjoint_case_near_miss()}) {
    out.push_back(fd_adjoint_check(c, fine));
  }

  ModelParams eq;
  eq.dt = 0.1;
  eq.control_period = 1.0;
  eq.horizon_T = 10.0;
  eq.eps = 1e-8;
  eq.max_iters = 20000;
  out.push_back(nash_stationarity_check(seed, 20, eq));

  out.push_back(brute_force_comparison(nash_instance_single(), 0.05));
  out.push_back(brute_force_comparison(nash_instance_head_on(), 0.1));
  out.push_back(brute_force_comparison(nash_instance_far_pair(), 0.1));
  return out;
}

}  // namespace dronegame
