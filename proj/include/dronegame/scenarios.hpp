// Scenario generators for the interaction experiments and the metrics
// reported over a simulation log.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dronegame/core.hpp"
#include "dronegame/engine.hpp"

namespace dronegame {

enum class Axis { X, Y, Z };

struct CrossSection {
  Axis axis = Axis::X;
  double offset = 0.0;
};

struct ScenarioConfig {
  std::string name;
  std::vector<DroneSpec> drones;
  std::vector<Obstacle> obstacles;
  double t_max = 100.0;
  CrossSection cross_section;

  /// Unique ids, valid obstacles, finite states, non-negative speeds.
  void validate() const;
};

/// Two drones at (+-10, 0, 1) heading for (-+10, 0, 1) from rest, initial x
/// and y jittered uniformly in [-perturbation, perturbation].
ScenarioConfig gen_one_on_one(double perturbation, std::uint64_t seed, double v0 = 1.0);

/// Two groups of n_total/2 drones drawn uniformly from 5 x 2 x 1 m boxes at
/// (+-12.5, 0, 1), flying toward each other from rest; targets lie 25 m past
/// the origin at each drone's own (y, z). Group 1 flies +x, group 2 flies -x.
/// With a bottleneck, radius-2 cylinders at (0, +-2.5) leave a 1 m gap.
ScenarioConfig gen_head_on(int n_total, std::uint64_t seed, bool with_bottleneck,
                           double v0 = 1.0);

/// Group 2 as the right head-on box (flying -x); group 1 from the same box
/// rotated to (0, 12.5, 1) flying -y.
ScenarioConfig gen_crossing(int n_total, std::uint64_t seed, double v0 = 1.0);

/// Minimum distance over samples and unordered pairs of non-arrived drones.
/// Throws std::invalid_argument for fewer than two drones.
double metric_min_pairwise_distance(const SimulationLog& log);

/// The same minimum restricted to pairs from different groups; empty with
/// fewer than two groups.
std::optional<double> metric_min_intergroup_distance(const SimulationLog& log);

/// Minimum clearance of a non-arrived drone to any obstacle; empty without
/// obstacles.
std::optional<double> metric_min_obstacle_distance(const SimulationLog& log,
                                                   std::span<const Obstacle> obstacles);

/// Mean of v . e over every pre-arrival sample, e being the unit direction
/// from the drone's current position to its target.
double metric_avg_directed_speed(const SimulationLog& log, std::span<const DroneSpec> specs);

struct CrossingPoint {
  double c1 = 0.0;  // first remaining coordinate (y for an x plane)
  double c2 = 0.0;  // second remaining coordinate (z for an x or y plane)
  double t = 0.0;
  int group = 0;
  int drone_id = 0;
};

enum class DirectionFilter { Any, TowardTarget, AwayFromTarget };

/// Linearly interpolated passages of every drone through the plane.
std::vector<CrossingPoint> crossing_points(const SimulationLog& log, const CrossSection& plane,
                                           DirectionFilter filter = DirectionFilter::TowardTarget);

/// Mean (c1, c2) distance between points of different groups divided by the
/// mean distance between points of the same group, both taken over ordered
/// pairs with self-pairs included. Values above 1 mean the
/// groups pass through separate regions of the plane. Throws
/// std::invalid_argument unless at least two groups have two points each.
double lane_separation_index(std::span<const CrossingPoint> points);

struct MetricsReport {
  std::optional<double> min_pairwise_distance;
  std::optional<double> min_intergroup_distance;
  std::optional<double> min_obstacle_distance;
  double avg_directed_speed = 0.0;
  std::vector<CrossingPoint> crossings;
  std::optional<double> lane_separation;
  int arrived = 0;
  int drones = 0;
};

MetricsReport compute_metrics(const SimulationLog& log, const ScenarioConfig& scenario);

}  // namespace dronegame
