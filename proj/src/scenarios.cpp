#include "dronegame/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

#include "dronegame/cost.hpp"

namespace dronegame {

namespace {

struct Box {
  Vec3 center;
  Vec3 half_extent;
};

constexpr double kGroupOffset = 12.5;
constexpr double kTargetDistance = 25.0;
constexpr double kFlightLevel = 1.0;

void fill_box(ScenarioConfig& sc, UniformSource& rng, const Box& box, int count, const Vec3& dir,
              int group, double v0) {
  for (int k = 0; k < count; ++k) {
    DroneSpec d;
    d.id = static_cast<int>(sc.drones.size());
    d.group = group;
    d.desired_speed = v0;
    const Vec3& c = box.center;
    const Vec3& h = box.half_extent;
    d.initial.position = {rng(c.x - h.x, c.x + h.x), rng(c.y - h.y, c.y + h.y),
                          rng(c.z - h.z, c.z + h.z)};
    // The target box sits 25 m past the origin; each drone keeps its offset
    // within the box, so targets stay as spread out as the start positions.
    d.target = d.initial.position + (kGroupOffset + kTargetDistance) * dir;
    sc.drones.push_back(d);
  }
}

double axis_value(const Vec3& p, Axis a) {
  switch (a) {
    case Axis::X:
      return p.x;
    case Axis::Y:
      return p.y;
    case Axis::Z:
      return p.z;
  }
  return p.x;
}

std::pair<double, double> remaining(const Vec3& p, Axis a) {
  switch (a) {
    case Axis::X:
      return {p.y, p.z};
    case Axis::Y:
      return {p.x, p.z};
    case Axis::Z:
      return {p.x, p.y};
  }
  return {p.y, p.z};
}

}  // namespace

void ScenarioConfig::validate() const {
  std::set<int> ids;
  for (const DroneSpec& d : drones) {
    if (!ids.insert(d.id).second) {
      throw ConfigError("scenario '" + name + "': duplicate drone id " + std::to_string(d.id));
    }
    if (!(d.desired_speed >= 0.0) || !std::isfinite(d.desired_speed)) {
      throw ConfigError("scenario '" + name + "': desired_speed must be >= 0");
    }
    if (!is_finite(d.initial.position) || !is_finite(d.initial.velocity) || !is_finite(d.target)) {
      throw ConfigError("scenario '" + name + "': non-finite drone state");
    }
  }
  for (const Obstacle& o : obstacles) o.validate();
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) {
    throw ConfigError("scenario '" + name + "': t_max must be finite and >= 0");
  }
}

ScenarioConfig gen_one_on_one(double perturbation, std::uint64_t seed, double v0) {
  if (!(perturbation >= 0.0)) throw ConfigError("perturbation must be >= 0");
  UniformSource rng(seed);
  ScenarioConfig sc;
  sc.name = "one_on_one";
  for (int k = 0; k < 2; ++k) {
    const double side = k == 0 ? -1.0 : 1.0;
    DroneSpec d;
    d.id = k;
    d.group = k + 1;
    d.desired_speed = v0;
    d.initial.position = {side * 10.0, 0.0, kFlightLevel};
    d.target = {-side * 10.0, 0.0, kFlightLevel};
    sc.drones.push_back(d);
  }
  for (DroneSpec& d : sc.drones) {
    d.initial.position.x += rng(-perturbation, perturbation);
    d.initial.position.y += rng(-perturbation, perturbation);
  }
  sc.t_max = 100.0;
  return sc;
}

ScenarioConfig gen_head_on(int n_total, std::uint64_t seed, bool with_bottleneck, double v0) {
  if (n_total < 2 || n_total % 2 != 0) {
    throw ConfigError("head-on scenario needs an even drone count >= 2");
  }
  UniformSource rng(seed);
  ScenarioConfig sc;
  sc.name = with_bottleneck ? "bottleneck" : "head_on";
  const Vec3 half{2.5, 1.0, 0.5};
  fill_box(sc, rng, {{-kGroupOffset, 0.0, kFlightLevel}, half}, n_total / 2, {1.0, 0.0, 0.0}, 1,
           v0);
  fill_box(sc, rng, {{kGroupOffset, 0.0, kFlightLevel}, half}, n_total / 2, {-1.0, 0.0, 0.0}, 2,
           v0);
  if (with_bottleneck) {
    sc.obstacles.push_back(Obstacle::cylinder(0.0, -2.5, 2.0));
    sc.obstacles.push_back(Obstacle::cylinder(0.0, 2.5, 2.0));
  }
  sc.cross_section = {Axis::X, 0.0};
  return sc;
}

ScenarioConfig gen_crossing(int n_total, std::uint64_t seed, double v0) {
  if (n_total < 2 || n_total % 2 != 0) {
    throw ConfigError("crossing scenario needs an even drone count >= 2");
  }
  UniformSource rng(seed);
  ScenarioConfig sc;
  sc.name = "crossing";
  fill_box(sc, rng, {{0.0, kGroupOffset, kFlightLevel}, {1.0, 2.5, 0.5}}, n_total / 2,
           {0.0, -1.0, 0.0}, 1, v0);
  fill_box(sc, rng, {{kGroupOffset, 0.0, kFlightLevel}, {2.5, 1.0, 0.5}}, n_total / 2,
           {-1.0, 0.0, 0.0}, 2, v0);
  sc.cross_section = {Axis::X, 0.0};
  return sc;
}

namespace {

// Tracks share the sample clock; a drone disappears after its arrival sample.
double min_distance_over(const SimulationLog& log, bool intergroup_only) {
  const std::size_t n = log.tracks.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (intergroup_only && log.specs[i].group == log.specs[j].group) continue;
      const auto& a = log.tracks[i];
      const auto& b = log.tracks[j];
      std::size_t ia = 0;
      std::size_t ib = 0;
      while (ia < a.size() && ib < b.size()) {
        if (a[ia].t < b[ib].t - 1e-9) {
          ++ia;
        } else if (b[ib].t < a[ia].t - 1e-9) {
          ++ib;
        } else {
          if (!a[ia].arrived && !b[ib].arrived) best = std::fmin(best, norm(a[ia].r - b[ib].r));
          ++ia;
          ++ib;
        }
      }
    }
  }
  return best;
}

}  // namespace

double metric_min_pairwise_distance(const SimulationLog& log) {
  if (log.tracks.size() < 2) {
    throw std::invalid_argument("minimum pairwise distance needs at least two drones");
  }
  return min_distance_over(log, false);
}

std::optional<double> metric_min_intergroup_distance(const SimulationLog& log) {
  std::set<int> groups;
  for (const DroneSpec& s : log.specs) groups.insert(s.group);
  if (groups.size() < 2 || log.specs.size() != log.tracks.size()) return std::nullopt;
  return min_distance_over(log, true);
}

std::optional<double> metric_min_obstacle_distance(const SimulationLog& log,
                                                   std::span<const Obstacle> obstacles) {
  if (obstacles.empty()) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& track : log.tracks) {
    for (const Sample& s : track) {
      if (s.arrived) continue;
      for (const Obstacle& o : obstacles) {
        best = std::fmin(best, obstacle_distance(s.r, o, 0.0));
      }
    }
  }
  return best;
}

double metric_avg_directed_speed(const SimulationLog& log, std::span<const DroneSpec> specs) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < log.tracks.size(); ++i) {
    for (const Sample& s : log.tracks[i]) {
      if (s.arrived) continue;
      sum += dot(s.v, unit_toward(s.r, specs[i].target, log.params.d_min));
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::vector<CrossingPoint> crossing_points(const SimulationLog& log, const CrossSection& plane,
                                           DirectionFilter filter) {
  std::vector<CrossingPoint> out;
  for (std::size_t i = 0; i < log.tracks.size(); ++i) {
    const auto& track = log.tracks[i];
    const DroneSpec& spec = log.specs[i];
    const double toward =
        axis_value(spec.target, plane.axis) - axis_value(spec.initial.position, plane.axis);
    for (std::size_t k = 0; k + 1 < track.size(); ++k) {
      const double s0 = axis_value(track[k].r, plane.axis) - plane.offset;
      const double s1 = axis_value(track[k + 1].r, plane.axis) - plane.offset;
      const bool up = s0 < 0.0 && s1 >= 0.0;
      const bool down = s0 > 0.0 && s1 <= 0.0;
      if (!up && !down) continue;
      const double sense = up ? 1.0 : -1.0;
      if (filter == DirectionFilter::TowardTarget && sense * toward <= 0.0) continue;
      if (filter == DirectionFilter::AwayFromTarget && sense * toward > 0.0) continue;
      const double w = s0 / (s0 - s1);
      Vec3 p = track[k].r + w * (track[k + 1].r - track[k].r);
      const auto [c1, c2] = remaining(p, plane.axis);
      out.push_back(CrossingPoint{c1, c2, track[k].t + w * (track[k + 1].t - track[k].t),
                                  spec.group, spec.id});
    }
  }
  return out;
}

double lane_separation_index(std::span<const CrossingPoint> points) {
  std::map<int, int> per_group;
  for (const CrossingPoint& p : points) ++per_group[p.group];
  int qualified = 0;
  for (const auto& [group, count] : per_group) {
    if (count < 2) {
      throw std::invalid_argument("lane separation needs >= 2 crossings in group " +
                                  std::to_string(group));
    }
    ++qualified;
  }
  if (qualified < 2) throw std::invalid_argument("lane separation needs at least two groups");

  // Ordered pairs, self-pairs included, so identical point sets give 1.
  double same = 0.0;
  double opposite = 0.0;
  std::size_t n_same = 0;
  std::size_t n_opposite = 0;
  for (const CrossingPoint& a : points) {
    for (const CrossingPoint& b : points) {
      const double d = std::hypot(a.c1 - b.c1, a.c2 - b.c2);
      if (a.group == b.group) {
        same += d;
        ++n_same;
      } else {
        opposite += d;
        ++n_opposite;
      }
    }
  }
  const double mean_same = same / static_cast<double>(n_same);
  const double mean_opposite = opposite / static_cast<double>(n_opposite);
  if (mean_same == 0.0) {
    return mean_opposite == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return mean_opposite / mean_same;
}

MetricsReport compute_metrics(const SimulationLog& log, const ScenarioConfig& scenario) {
  MetricsReport m;
  m.drones = static_cast<int>(log.tracks.size());
  for (const auto& a : log.arrival_time) m.arrived += a.has_value() ? 1 : 0;
  if (log.tracks.size() >= 2) m.min_pairwise_distance = metric_min_pairwise_distance(log);
  m.min_intergroup_distance = metric_min_intergroup_distance(log);
  m.min_obstacle_distance = metric_min_obstacle_distance(log, scenario.obstacles);
  m.avg_directed_speed = metric_avg_directed_speed(log, log.specs);
  m.crossings = crossing_points(log, scenario.cross_section);
  try {
    m.lane_separation = lane_separation_index(m.crossings);
  } catch (const std::invalid_argument&) {
    m.lane_separation.reset();
  }
  return m;
}

}  // namespace dronegame
