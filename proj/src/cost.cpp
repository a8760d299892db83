#include "dronegame/cost.hpp"

#include <cmath>

namespace dronegame {

double stray_cost(const Vec3& v, const Vec3& v_desired) {
  const Vec3 d = v_desired - v;
  return 0.5 * dot(d, d);
}

double proximity_cost(const Vec3& r_self, std::span<const Vec3> others, double d0, double d_min) {
  double sum = 0.0;
  for (const Vec3& r : others) {
    sum += std::exp(-std::fmax(norm(r - r_self), d_min) / d0);
  }
  return sum;
}

double accel_cost(const Vec3& u) { return 0.5 * dot(u, u); }

namespace {

double raw_obstacle_distance(const Vec3& r, const Obstacle& o) {
  if (o.kind == Obstacle::Kind::VerticalCylinder) {
    return std::hypot(r.x - o.center_x, r.y - o.center_y) - o.radius;
  }
  return dot(o.normal, r) - o.offset;
}

// Unit direction in which the clearance decreases fastest.
Vec3 obstacle_approach_direction(const Vec3& r, const Obstacle& o) {
  if (o.kind == Obstacle::Kind::VerticalCylinder) {
    const double dx = o.center_x - r.x;
    const double dy = o.center_y - r.y;
    const double rho = std::hypot(dx, dy);
    if (rho == 0.0) return {};
    return {dx / rho, dy / rho, 0.0};
  }
  return -o.normal;
}

}  // namespace

double obstacle_distance(const Vec3& r, const Obstacle& obstacle, double d_min) {
  return std::fmax(raw_obstacle_distance(r, obstacle), d_min);
}

double obstacle_cost(const Vec3& r, std::span<const Obstacle> obstacles, double d1, double d_min) {
  double sum = 0.0;
  for (const Obstacle& o : obstacles) {
    sum += std::exp(-obstacle_distance(r, o, d_min) / d1);
  }
  return sum;
}

Vec3 desired_velocity(const Vec3& r, const Vec3& target, double v0, double dt, double d_min) {
  const Vec3 gap = target - r;
  if (norm(gap) >= v0 * dt) {
    return v0 * unit_toward(r, target, d_min);
  }
  return gap / dt;
}

namespace {

double proximity_excluding(std::size_t i, std::span<const Vec3> positions, double d0,
                           double d_min) {
  double sum = 0.0;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (j == i) continue;
    sum += std::exp(-std::fmax(norm(positions[j] - positions[i]), d_min) / d0);
  }
  return sum;
}

}  // namespace

CostBreakdown running_cost(std::size_t i, std::span<const Vec3> positions, const Vec3& velocity,
                           const Vec3& control, const Vec3& v_desired,
                           std::span<const Obstacle> obstacles, const ModelParams& params) {
  CostBreakdown c;
  c.stray = stray_cost(velocity, v_desired);
  c.prox = proximity_excluding(i, positions, params.d0, params.d_min);
  c.accel = accel_cost(control);
  c.obs = obstacle_cost(positions[i], obstacles, params.d1, params.d_min);
  c.total = params.alpha * c.stray + params.beta0 * c.prox + c.accel + params.beta1 * c.obs;
  return c;
}

Vec3 grad_running_cost_r(std::size_t i, std::span<const Vec3> positions,
                         std::span<const Obstacle> obstacles, const ModelParams& params) {
  const Vec3& ri = positions[i];
  Vec3 drones;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (j == i) continue;
    const Vec3 sep = positions[j] - ri;
    const double dist = std::fmax(norm(sep), params.d_min);
    // n_ij points from the ego drone toward the opponent.
    drones += std::exp(-dist / params.d0) * (sep / dist);
  }
  Vec3 obs;
  for (const Obstacle& o : obstacles) {
    const double raw = raw_obstacle_distance(ri, o);
    if (raw <= params.d_min) continue;  // clamped: flat cost, zero gradient
    obs += std::exp(-raw / params.d1) * obstacle_approach_direction(ri, o);
  }
  return (params.beta0 / params.d0) * drones + (params.beta1 / params.d1) * obs;
}

Vec3 grad_running_cost_v(const Vec3& velocity, const Vec3& v_desired, double alpha) {
  return -alpha * (v_desired - velocity);
}

double hamiltonian(double t, std::size_t i, std::span<const Vec3> positions, const Vec3& velocity,
                   const Vec3& control, const Vec3& v_desired, const Vec3& lambda_r,
                   const Vec3& lambda_v, std::span<const Obstacle> obstacles,
                   const ModelParams& params) {
  const double running =
      running_cost(i, positions, velocity, control, v_desired, obstacles, params).total;
  return std::exp(-params.eta * t) * running + dot(lambda_r, velocity) + dot(lambda_v, control);
}

std::vector<Vec3> desired_profile(const JointTrajectory& traj, std::size_t i, const DroneSpec& spec,
                                  const ModelParams& params) {
  std::vector<Vec3> out;
  out.reserve(traj.r[i].size());
  for (const Vec3& r : traj.r[i]) {
    out.push_back(
        desired_velocity(r, spec.target, spec.desired_speed, params.braking_time, params.d_min));
  }
  return out;
}

double discrete_cost(const JointTrajectory& traj, std::size_t i, std::span<const Vec3> v_desired,
                     std::span<const Obstacle> obstacles, const ModelParams& params) {
  const HorizonGrid& g = traj.grid;
  const std::size_t n = traj.drone_count();
  std::vector<Vec3> positions(n);
  double sum = 0.0;
  for (int k = 0; k < g.n_steps; ++k) {
    for (std::size_t j = 0; j < n; ++j) positions[j] = traj.r[j][k + 1];
    const CostBreakdown c = running_cost(i, positions, traj.v[i][k + 1], traj.u[i][k],
                                         v_desired[k + 1], obstacles, params);
    sum += std::exp(-params.eta * g.time(k)) * c.total * g.dt;
  }
  return sum;
}

double discrete_cost(const JointTrajectory& traj, std::size_t i, std::span<const DroneSpec> specs,
                     std::span<const Obstacle> obstacles, const ModelParams& params) {
  const std::vector<Vec3> profile = desired_profile(traj, i, specs[i], params);
  return discrete_cost(traj, i, profile, obstacles, params);
}

}  // namespace dronegame
