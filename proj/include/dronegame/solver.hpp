// Joint Nash-equilibrium solve over one prediction horizon by a relaxed
// forward-backward sweep fixed point.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dronegame/core.hpp"

namespace dronegame {

struct SolveResult {
  JointTrajectory trajectory;  // induced by the final relaxed co-states
  int iterations = 0;
  double final_error = 0.0;
  std::vector<double> trace;  // fixed-point residual after each iteration
  bool converged = false;
};

/// Minimizer of the Hamiltonian over the control: u* = -lambda_v.
constexpr Vec3 optimal_control(const Vec3& lambda_v) { return -lambda_v; }

/// Integrates every drone forward with u[k] = -lambda_v[k] (explicit Euler,
/// positions advanced with the pre-update velocity). The co-states are
/// copied into the result. Throws NumericalBlowup.
JointTrajectory forward_sweep(std::span<const DroneState> initial, const CoStates& costates,
                              const HorizonGrid& grid);

/// Discrete adjoint of the planned states. Terminal co-states are zero and
/// entry k-1 is built from the gradients at grid index k, with each drone
/// seeing the other drones' current planned positions. Throws NumericalBlowup.
CoStates backward_sweep(const JointTrajectory& states, std::span<const DroneSpec> specs,
                        std::span<const Obstacle> obstacles, const ModelParams& params);

/// (1 - a) * prev + a * next, elementwise.
CoStates relax(const CoStates& prev, const CoStates& next, double a);

/// Sup-norm of the componentwise difference over drones, grid points and
/// both co-state families.
double iteration_error(const CoStates& a, const CoStates& b);

/// Solves the joint game from `initial` (one state per spec) on `grid`.
/// Starts from `warm_start` when given, otherwise from zero co-states.
/// Non-convergence is reported through SolveResult::converged. Throws
/// NumericalBlowup and ConfigError.
SolveResult solve_game(std::span<const DroneSpec> specs, std::span<const DroneState> initial,
                       std::span<const Obstacle> obstacles, const HorizonGrid& grid,
                       const ModelParams& params,
                       const std::optional<CoStates>& warm_start = std::nullopt);

struct FixedPointTrace {
  std::vector<double> trace;
  bool converged = false;
  bool blew_up = false;
  std::string failure;
};

/// Cold-start iteration as in solve_game, keeping the residual trace when
/// the iterates blow up instead of throwing.
FixedPointTrace trace_fixed_point(std::span<const DroneSpec> specs,
                                  std::span<const DroneState> initial,
                                  std::span<const Obstacle> obstacles, const HorizonGrid& grid,
                                  const ModelParams& params);

/// Sensitivity of drone i's discrete cost to its state at the start of the
/// horizon, completed from the co-states at index 0 (the co-state at index
/// k prices the state at k+1). Returns {dJ/dr(0), dJ/dv(0)}.
std::pair<Vec3, Vec3> initial_state_sensitivity(const JointTrajectory& traj, std::size_t i);

}  // namespace dronegame
