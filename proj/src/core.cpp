#include "dronegame/core.hpp"

#include <cmath>
#include <sstream>

namespace dronegame {

Vec3 unit_toward(const Vec3& from, const Vec3& to, double floor) {
  const Vec3 d = to - from;
  return d / std::fmax(norm(d), floor);
}

Obstacle Obstacle::cylinder(double cx, double cy, double radius) {
  Obstacle o;
  o.kind = Kind::VerticalCylinder;
  o.center_x = cx;
  o.center_y = cy;
  o.radius = radius;
  o.validate();
  return o;
}

Obstacle Obstacle::half_space(const Vec3& normal, double offset) {
  Obstacle o;
  o.kind = Kind::HalfSpace;
  o.normal = normal;
  o.offset = offset;
  o.validate();
  return o;
}

void Obstacle::validate() const {
  if (kind == Kind::VerticalCylinder) {
    if (!(radius > 0.0) || !std::isfinite(radius) || !std::isfinite(center_x) ||
        !std::isfinite(center_y)) {
      throw ConfigError("cylinder obstacle needs a finite positive radius");
    }
  } else {
    if (!is_finite(normal) || std::fabs(norm(normal) - 1.0) > 1e-9 || !std::isfinite(offset)) {
      throw ConfigError("half-space obstacle needs a unit normal");
    }
  }
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid parameter: ") + what);
}

bool near_integer(double x, double tol = 1e-9) { return std::fabs(x - std::round(x)) <= tol; }

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha >= 0");
  require(std::isfinite(beta0) && beta0 >= 0.0, "beta0 >= 0");
  require(std::isfinite(beta1) && beta1 >= 0.0, "beta1 >= 0");
  require(std::isfinite(d0) && d0 > 0.0, "d0 > 0");
  require(std::isfinite(d1) && d1 > 0.0, "d1 > 0");
  require(std::isfinite(eta) && eta >= 0.0, "eta >= 0");
  require(std::isfinite(horizon_T) && horizon_T > 0.0, "horizon_T > 0");
  require(std::isfinite(dt) && dt > 0.0, "dt > 0");
  require(dt <= horizon_T + 1e-12, "dt <= horizon_T");
  require(near_integer(horizon_T / dt), "horizon_T is an integer multiple of dt");
  require(std::isfinite(control_period) && control_period > 0.0, "control_period > 0");
  require(near_integer(control_period / dt) && std::round(control_period / dt) >= 1.0,
          "control_period is a positive integer multiple of dt");
  require(control_period <= horizon_T + 1e-12, "control_period <= horizon_T");
  require(relaxation_a > 0.0 && relaxation_a <= 1.0, "0 < relaxation_a <= 1");
  require(eps > 0.0, "eps > 0");
  require(max_iters >= 1, "max_iters >= 1");
  require(std::isfinite(arrival_radius) && arrival_radius >= 0.0, "arrival_radius >= 0");
  require(std::isfinite(braking_time) && braking_time > 0.0, "braking_time > 0");
  require(std::isfinite(d_min) && d_min > 0.0, "d_min > 0");
}

int ModelParams::steps_per_control() const {
  return static_cast<int>(std::lround(control_period / dt));
}

HorizonGrid make_grid(double t0, double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0) || !std::isfinite(horizon) || !std::isfinite(dt)) {
    throw ConfigError("horizon grid needs T > 0 and dt > 0");
  }
  const double ratio = horizon / dt;
  if (!near_integer(ratio)) {
    std::ostringstream msg;
    msg << "horizon " << horizon << " is not an integer multiple of dt " << dt;
    throw ConfigError(msg.str());
  }
  return HorizonGrid{t0, static_cast<int>(std::lround(ratio)), dt};
}

CoStates CoStates::zeros(std::size_t n_drones, const HorizonGrid& grid) {
  const auto len = static_cast<std::size_t>(grid.n_steps) + 1;
  CoStates c;
  c.lambda_r.assign(n_drones, std::vector<Vec3>(len));
  c.lambda_v.assign(n_drones, std::vector<Vec3>(len));
  return c;
}

}  // namespace dronegame
