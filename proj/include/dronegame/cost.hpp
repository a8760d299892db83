// Running-cost terms, their gradients, the Hamiltonian and the discretized
// cost functional of one drone.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dronegame/core.hpp"

namespace dronegame {

struct CostBreakdown {
  double stray = 0.0;
  double prox = 0.0;
  double accel = 0.0;
  double obs = 0.0;
  double total = 0.0;  // alpha*stray + beta0*prox + accel + beta1*obs
};

/// 0.5 * |v_desired - v|^2
double stray_cost(const Vec3& v, const Vec3& v_desired);

/// Sum over `others` of exp(-max(|r_j - r_self|, d_min) / d0).
double proximity_cost(const Vec3& r_self, std::span<const Vec3> others, double d0, double d_min);

/// 0.5 * u.u
double accel_cost(const Vec3& u);

/// Clearance from `r` to the obstacle surface, clamped below at d_min.
double obstacle_distance(const Vec3& r, const Obstacle& obstacle, double d_min);

double obstacle_cost(const Vec3& r, std::span<const Obstacle> obstacles, double d1, double d_min);

/// Cruise at v0 toward the target; within v0 * dt of it the velocity brakes
/// to (target - r) / dt. Planning passes ModelParams::braking_time as dt.
Vec3 desired_velocity(const Vec3& r, const Vec3& target, double v0, double dt, double d_min);

/// Running cost of drone `i`. `positions` holds every drone's position
/// (including drone i at index i); the others enter the proximity sum.
CostBreakdown running_cost(std::size_t i, std::span<const Vec3> positions, const Vec3& velocity,
                           const Vec3& control, const Vec3& v_desired,
                           std::span<const Obstacle> obstacles, const ModelParams& params);

/// dL/dr_i. Opponents are summed in index order.
Vec3 grad_running_cost_r(std::size_t i, std::span<const Vec3> positions,
                         std::span<const Obstacle> obstacles, const ModelParams& params);

/// dL/dv_i = -alpha (v_desired - v).
Vec3 grad_running_cost_v(const Vec3& velocity, const Vec3& v_desired, double alpha);

/// exp(-eta t) L + lambda_r . v_i + lambda_v . u_i for drone i.
double hamiltonian(double t, std::size_t i, std::span<const Vec3> positions, const Vec3& velocity,
                   const Vec3& control, const Vec3& v_desired, const Vec3& lambda_r,
                   const Vec3& lambda_v, std::span<const Obstacle> obstacles,
                   const ModelParams& params);

/// Desired velocity of drone `i` at every grid point of its planned path.
std::vector<Vec3> desired_profile(const JointTrajectory& traj, std::size_t i, const DroneSpec& spec,
                                  const ModelParams& params);

/// Discretized cost of drone i over the horizon:
///   sum_{k=0}^{N-1} dt * exp(-eta t_k) * L_k
/// where the step cost L_k charges the control u[k] applied on [t_k, t_k+dt)
/// together with the state x[k+1] it produces. The initial state is fixed and
/// carries no cost, and there is no terminal cost.
///
/// `v_desired` has N+1 entries (entry 0 is unused).
double discrete_cost(const JointTrajectory& traj, std::size_t i, std::span<const Vec3> v_desired,
                     std::span<const Obstacle> obstacles, const ModelParams& params);

/// Same, with the desired velocities evaluated along the planned path.
double discrete_cost(const JointTrajectory& traj, std::size_t i, std::span<const DroneSpec> specs,
                     std::span<const Obstacle> obstacles, const ModelParams& params);

}  // namespace dronegame
