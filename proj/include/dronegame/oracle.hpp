// Finite-difference and exhaustive-search checks of the cost gradients, the
// adjoint sweep and the equilibrium the solver converges to.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dronegame/core.hpp"

namespace dronegame {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckReport {
  std::string name;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;  // max_relative_error <= tolerance
  int samples = 0;
};

/// ||a - b|| / max(||a||, ||b||, 1e-8)
double relative_error(std::span<const double> a, std::span<const double> b);

/// Stand-in for grad_running_cost_r, used to feed a corrupted gradient to
/// the check.
using PositionGradient = std::function<Vec3(std::size_t, std::span<const Vec3>,
                                            std::span<const Obstacle>, const ModelParams&)>;

/// Compares the analytic position and velocity gradients against central
/// differences (step 1e-5) of the total running cost on random
/// configurations of 2-5 drones and 0-2 obstacles. Tolerance 1e-5.
CheckReport fd_cost_gradients(std::uint64_t seed, int n_samples, const ModelParams& params,
                              const PositionGradient& grad_r = {});

struct AdjointCase {
  std::string name;
  std::vector<DroneSpec> specs;
  std::vector<DroneState> initial;
  std::vector<Obstacle> obstacles;
};

AdjointCase adjoint_case_cruising();
AdjointCase adjoint_case_off_speed();
AdjointCase adjoint_case_near_miss();

/// Plans a trajectory, then compares every drone's initial-state
/// sensitivity from the backward sweep against central differences of its
/// discrete cost with the controls, the other drones and the desired
/// velocities held fixed. Requires dt <= 0.01 and at most 200 steps.
/// Tolerance 1e-3.
CheckReport fd_adjoint_check(const AdjointCase& c, const ModelParams& params);

/// Line-restricted instance for the exhaustive best-response search: every
/// drone moves along x only, controls take values in `levels` at each step.
struct NashInstance {
  std::string name;
  std::vector<DroneSpec> specs;  // at most two
  ModelParams params;            // horizon_T / dt gives at most 4 steps
  std::vector<double> levels = {-1.0, -0.5, 0.0, 0.5, 1.0};
};

struct NashOracleResult {
  std::vector<double> costs;
  std::vector<std::vector<double>> controls;  // x controls per drone
  int rounds = 0;
};

/// Best-response iteration: drones in turn exhaustively minimize their
/// discrete cost over the control grid given the others' current plans,
/// until a full round changes nothing. Throws OracleError after 100 rounds.
NashOracleResult brute_force_nash(const NashInstance& instance);

NashInstance nash_instance_single();
NashInstance nash_instance_head_on();
NashInstance nash_instance_far_pair();

/// Converged solver cost against the oracle cost for every drone;
/// max_relative_error holds the largest excess of the solver cost over the
/// oracle cost (zero when the solver does at least as well).
CheckReport brute_force_comparison(const NashInstance& instance, double slack);

/// Solves a two-drone crossing to `eps` and probes drone 0's discrete cost
/// along `n_directions` random unit (sup-norm) control perturbations with
/// central differences of size 1e-4, the other drone's plan and the
/// desired velocities held fixed. max_relative_error holds the largest
/// directional derivative magnitude. Tolerance 1e-3.
CheckReport nash_stationarity_check(std::uint64_t seed, int n_directions, const ModelParams& params);

/// The full suite behind the `check` command.
std::vector<CheckReport> run_all_checks(std::uint64_t seed, int gradient_samples);

}  // namespace dronegame
