// Domain types shared by the cost, solver and engine layers.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dronegame {

/// Raised when a configuration value violates a documented invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a sweep produces a non-finite or absurdly large value.
class NumericalBlowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}
/// Largest absolute component.
inline double max_abs(const Vec3& a) {
  return std::fmax(std::fabs(a.x), std::fmax(std::fabs(a.y), std::fabs(a.z)));
}

/// (to - from) / max(|to - from|, floor). Exact unit vector unless the two
/// points are closer than `floor`, in which case the result shrinks to zero.
Vec3 unit_toward(const Vec3& from, const Vec3& to, double floor);

/// Uniform doubles from mt19937_64 using the top 53 bits, so draws are the
/// same on every standard library.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  double operator()(double lo, double hi) {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }

 private:
  std::mt19937_64 engine_;
};

struct DroneState {
  Vec3 position;  // m
  Vec3 velocity;  // m/s
};

struct DroneSpec {
  int id = 0;
  DroneState initial;
  Vec3 target;                 // m
  double desired_speed = 1.0;  // m/s
  int group = 0;
};

/// Static obstacle: an infinite vertical cylinder or a half-space whose
/// free side is {r : normal . r >= offset}.
struct Obstacle {
  enum class Kind { VerticalCylinder, HalfSpace };

  Kind kind = Kind::VerticalCylinder;
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 1.0;
  Vec3 normal{0.0, 0.0, 1.0};
  double offset = 0.0;

  static Obstacle cylinder(double cx, double cy, double radius);
  static Obstacle half_space(const Vec3& normal, double offset);
  void validate() const;
};

struct ModelParams {
  double alpha = 1.0;   // stray weight
  double beta0 = 10.0;  // proximity weight
  double beta1 = 10.0;  // obstacle weight
  double d0 = 0.1;      // drone interaction scale R (m)
  double d1 = 0.1;      // obstacle interaction scale (m)
  double eta = 0.0;     // discount rate (1/s)
  double horizon_T = 5.0;
  double dt = 0.25;
  double control_period = 1.0;
  double relaxation_a = 0.02;
  double eps = 1e-3;
  int max_iters = 200;
  double arrival_radius = 0.5;
  double braking_time = 1.0;  // time constant of the braking desired velocity (s)
  double d_min = 1e-6;
  bool warm_start = true;  // receding horizon reuses the shifted co-states

  /// Throws ConfigError when any field is out of range.
  void validate() const;
  /// control_period / dt as an integer.
  int steps_per_control() const;
};

struct HorizonGrid {
  double t0 = 0.0;
  int n_steps = 1;
  double dt = 0.25;

  double time(int k) const { return t0 + k * dt; }
  double horizon() const { return n_steps * dt; }
};

/// Grid t0, t0 + dt, ..., t0 + T. Rejects T/dt that is not an integer.
HorizonGrid make_grid(double t0, double horizon, double dt);

/// Per-drone arrays indexed [drone][grid index].
using Series = std::vector<std::vector<Vec3>>;

/// Co-state arrays on a horizon grid; both families hold N+1 entries per drone.
struct CoStates {
  Series lambda_r;
  Series lambda_v;

  static CoStates zeros(std::size_t n_drones, const HorizonGrid& grid);
  std::size_t drone_count() const { return lambda_r.size(); }
};

/// Planned joint trajectory over one horizon. r, v and the co-states carry
/// N+1 entries per drone; u carries N (left endpoints).
struct JointTrajectory {
  HorizonGrid grid;
  Series r;
  Series v;
  Series u;
  Series lambda_r;
  Series lambda_v;

  std::size_t drone_count() const { return r.size(); }
};

}  // namespace dronegame
