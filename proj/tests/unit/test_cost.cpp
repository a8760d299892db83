#include <doctest.h>

#include <cmath>
#include <vector>

#include "dronegame/cost.hpp"

using namespace dronegame;
using doctest::Approx;

TEST_CASE("stray, accel and proximity examples") {
  CHECK(stray_cost({1, 0, 0}, {1, 0, 0}) == 0.0);
  CHECK(stray_cost({0, 0, 0}, {1, 0, 0}) == 0.5);
  CHECK(stray_cost({0, 1, 0}, {1, 0, 0}) == 1.0);

  CHECK(accel_cost({0, 0, 0}) == 0.0);
  CHECK(accel_cost({1, 0, 0}) == 0.5);
  CHECK(accel_cost({1, 2, 2}) == 4.5);

  const std::vector<Vec3> one{{0.1, 0, 0}};
  CHECK(proximity_cost({0, 0, 0}, one, 0.1, 1e-6) == Approx(std::exp(-1.0)));
  const std::vector<Vec3> same{{0, 0, 0}};
  CHECK(proximity_cost({0, 0, 0}, same, 0.1, 1e-6) == Approx(std::exp(-1e-5)));
  const std::vector<Vec3> two{{0.34, 0, 0}, {0, 0.68, 0}};
  CHECK(proximity_cost({0, 0, 0}, two, 0.1, 1e-6) == Approx(std::exp(-3.4) + std::exp(-6.8)));
  CHECK(proximity_cost({0, 0, 0}, two, 0.1, 1e-6) == Approx(0.034487).epsilon(1e-5));
}

TEST_CASE("proximity cost decreases with distance") {
  double last = INFINITY;
  for (double d = 1e-4; d < 2.0; d *= 1.5) {
    const std::vector<Vec3> other{{d, 0, 0}};
    const double c = proximity_cost({0, 0, 0}, other, 0.1, 1e-6);
    CHECK(c < last);
    last = c;
  }
}

TEST_CASE("obstacle distance and cost examples") {
  const Obstacle south = Obstacle::cylinder(0, -2.5, 2);
  const Obstacle north = Obstacle::cylinder(0, 2.5, 2);
  CHECK(obstacle_distance({0, 0, 1}, south, 1e-6) == Approx(0.5));
  CHECK(obstacle_distance({5, 5, 3}, Obstacle::half_space({0, 0, 1}, 0), 1e-6) == Approx(3.0));
  CHECK(obstacle_distance({0, 2.5, 1}, north, 1e-6) == 1e-6);

  CHECK(obstacle_cost({0, 0, 1}, {}, 0.1, 1e-6) == 0.0);
  const std::vector<Obstacle> at_d1{Obstacle::half_space({0, 0, 1}, 0)};
  CHECK(obstacle_cost({0, 0, 0.1}, at_d1, 0.1, 1e-6) == Approx(std::exp(-1.0)));
  const std::vector<Obstacle> pair{south, north};
  CHECK(obstacle_cost({0, 0, 1}, pair, 0.1, 1e-6) == Approx(2.0 * std::exp(-5.0)));
  CHECK(obstacle_cost({0, 0, 1}, pair, 0.1, 1e-6) == Approx(0.013476).epsilon(1e-4));
}

TEST_CASE("desired velocity examples") {
  CHECK(desired_velocity({0, 0, 0}, {10, 0, 0}, 1, 1, 1e-6) == Vec3{1, 0, 0});
  const Vec3 b = desired_velocity({9.5, 0, 0}, {10, 0, 0}, 1, 1, 1e-6);
  CHECK(b.x == Approx(0.5));
  CHECK(desired_velocity({10, 0, 0}, {10, 0, 0}, 1, 1, 1e-6) == Vec3{0, 0, 0});
}

TEST_CASE("running cost examples") {
  ModelParams p;
  const std::vector<Vec3> alone{{0, 0, 0}};
  CHECK(running_cost(0, alone, {1, 0, 0}, {0, 0, 0}, {1, 0, 0}, {}, p).total == 0.0);
  CHECK(running_cost(0, alone, {0, 0, 0}, {0, 0, 0}, {1, 0, 0}, {}, p).total == 0.5);
  const std::vector<Vec3> pair{{0, 0, 0}, {0.1, 0, 0}};
  const CostBreakdown c = running_cost(0, pair, {1, 0, 0}, {0, 0, 0}, {1, 0, 0}, {}, p);
  CHECK(c.total == Approx(10.0 * std::exp(-1.0)));
  CHECK(c.total == Approx(3.67879).epsilon(1e-5));
}

TEST_CASE("cost breakdown total is the weighted sum") {
  ModelParams p;
  p.alpha = 1.7;
  p.beta0 = 3.0;
  p.beta1 = 0.4;
  UniformSource rng(11);
  for (int k = 0; k < 100; ++k) {
    const std::vector<Vec3> pos{{rng(-1, 1), rng(-1, 1), rng(-1, 1)},
                                {rng(-1, 1), rng(-1, 1), rng(-1, 1)}};
    const std::vector<Obstacle> obs{Obstacle::cylinder(rng(-1, 1), rng(-1, 1), 0.3)};
    const CostBreakdown c = running_cost(0, pos, {rng(-1, 1), 0, 0}, {0, rng(-1, 1), 0},
                                         {1, 0, 0}, obs, p);
    CHECK(c.stray >= 0.0);
    CHECK(c.prox >= 0.0);
    CHECK(c.accel >= 0.0);
    CHECK(c.obs >= 0.0);
    const double sum = p.alpha * c.stray + p.beta0 * c.prox + c.accel + p.beta1 * c.obs;
    CHECK(c.total == Approx(sum).epsilon(1e-12));
  }
}

TEST_CASE("position gradient examples") {
  ModelParams p;
  p.beta0 = 1.0;
  const std::vector<Vec3> alone{{1, 2, 3}};
  CHECK(grad_running_cost_r(0, alone, {}, p) == Vec3{});
  const std::vector<Vec3> pair{{0, 0, 0}, {p.d0, 0, 0}};
  const Vec3 g = grad_running_cost_r(0, pair, {}, p);
  CHECK(g.x == Approx(std::exp(-1.0) / p.d0));
  CHECK(g.y == 0.0);
  CHECK(g.z == 0.0);
}

TEST_CASE("velocity gradient examples") {
  CHECK(grad_running_cost_v({1, 2, 3}, {1, 2, 3}, 1.0) == Vec3{});
  CHECK(grad_running_cost_v({0, 0, 0}, {1, 0, 0}, 1.0) == Vec3{-1, 0, 0});
}

namespace {

double fd_component(auto f, Vec3 x, int axis, double h = 1e-5) {
  Vec3 a = x, b = x;
  (axis == 0 ? a.x : axis == 1 ? a.y : a.z) += h;
  (axis == 0 ? b.x : axis == 1 ? b.y : b.z) -= h;
  return (f(a) - f(b)) / (2 * h);
}

double rel(const Vec3& a, const Vec3& b) {
  return norm(a - b) / std::fmax(std::fmax(norm(a), norm(b)), 1e-8);
}

}  // namespace

TEST_CASE("gradients match finite differences on a wide box") {
  ModelParams p;
  p.d0 = 1.0;  // keeps interactions visible across [-5, 5]^3
  p.d1 = 1.0;
  UniformSource rng(5);
  for (int k = 0; k < 200; ++k) {
    std::vector<Vec3> pos;
    for (int j = 0; j < 3; ++j) pos.push_back({rng(-5, 5), rng(-5, 5), rng(-5, 5)});
    const std::vector<Obstacle> obs{Obstacle::cylinder(rng(-5, 5), rng(-5, 5), 0.5),
                                    Obstacle::half_space({0, 0, 1}, -6)};
    auto position_cost = [&](const Vec3& r) {
      std::vector<Vec3> q = pos;
      q[0] = r;
      const std::vector<Vec3> others(q.begin() + 1, q.end());
      return p.beta0 * proximity_cost(r, others, p.d0, p.d_min) +
             p.beta1 * obstacle_cost(r, obs, p.d1, p.d_min);
    };
    Vec3 fd{fd_component(position_cost, pos[0], 0), fd_component(position_cost, pos[0], 1),
            fd_component(position_cost, pos[0], 2)};
    CHECK(rel(grad_running_cost_r(0, pos, obs, p), fd) < 1e-5);

    const Vec3 v{rng(-2, 2), rng(-2, 2), rng(-2, 2)};
    const Vec3 vd{rng(-2, 2), rng(-2, 2), rng(-2, 2)};
    const double alpha = rng(0.1, 3);
    auto stray = [&](const Vec3& x) { return alpha * stray_cost(x, vd); };
    Vec3 fdv{fd_component(stray, v, 0), fd_component(stray, v, 1), fd_component(stray, v, 2)};
    CHECK(rel(grad_running_cost_v(v, vd, alpha), fdv) < 1e-7);
  }
}

TEST_CASE("obstacle gradient is zero inside an obstacle") {
  ModelParams p;
  const std::vector<Vec3> pos{{0, 2.5, 1}};
  const std::vector<Obstacle> obs{Obstacle::cylinder(0, 2.5, 2)};
  CHECK(grad_running_cost_r(0, pos, obs, p) == Vec3{});
}

TEST_CASE("proximity gradient is translation and rotation invariant") {
  ModelParams p;
  p.d0 = 0.5;
  UniformSource rng(9);
  const double c = std::cos(0.7), s = std::sin(0.7);
  auto rot = [&](const Vec3& v) { return Vec3{c * v.x - s * v.y, s * v.x + c * v.y, v.z}; };
  for (int k = 0; k < 50; ++k) {
    std::vector<Vec3> pos;
    for (int j = 0; j < 4; ++j) pos.push_back({rng(-1, 1), rng(-1, 1), rng(-1, 1)});
    const Vec3 g = grad_running_cost_r(1, pos, {}, p);
    const Vec3 shift{rng(-10, 10), rng(-10, 10), rng(-10, 10)};
    std::vector<Vec3> moved, turned;
    for (const Vec3& r : pos) {
      moved.push_back(r + shift);
      turned.push_back(rot(r));
    }
    const std::vector<Vec3> others(pos.begin() + 1, pos.end());
    std::vector<Vec3> moved_others(moved.begin() + 1, moved.end());
    CHECK(proximity_cost(moved[0], moved_others, p.d0, p.d_min) ==
          Approx(proximity_cost(pos[0], others, p.d0, p.d_min)).epsilon(1e-12));
    CHECK(norm(grad_running_cost_r(1, moved, {}, p) - g) < 1e-9 * (1 + norm(g)));
    CHECK(norm(grad_running_cost_r(1, turned, {}, p) - rot(g)) < 1e-10 * (1 + norm(g)));
  }
}

TEST_CASE("hamiltonian examples") {
  ModelParams p;
  const std::vector<Vec3> alone{{0, 0, 0}};
  const double L = running_cost(0, alone, {0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}, {}, p).total;
  CHECK(hamiltonian(3, 0, alone, {0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}, {}, {}, {}, p) == L);
  CHECK(hamiltonian(0, 0, alone, {2, 0, 0}, {0, 0, 0}, {2, 0, 0}, {1, 0, 0}, {}, {}, p) == 2.0);
  p.eta = 0.1;
  // L = 1 from a stray deficit of sqrt(2) with alpha = 1.
  const double h =
      hamiltonian(10, 0, alone, {0, 0, 0}, {0, 0, 0}, {1, 1, 0}, {}, {}, {}, p);
  CHECK(h == Approx(std::exp(-1.0)));
}

namespace {

JointTrajectory resting_drone(int n_steps, double dt) {
  JointTrajectory t;
  t.grid = make_grid(0, n_steps * dt, dt);
  t.r.assign(1, std::vector<Vec3>(n_steps + 1));
  t.v.assign(1, std::vector<Vec3>(n_steps + 1));
  t.u.assign(1, std::vector<Vec3>(n_steps));
  t.lambda_r.assign(1, std::vector<Vec3>(n_steps + 1));
  t.lambda_v.assign(1, std::vector<Vec3>(n_steps + 1));
  return t;
}

}  // namespace

TEST_CASE("discrete cost examples") {
  ModelParams p;
  p.horizon_T = 10;
  p.dt = 1;
  p.control_period = 1;
  JointTrajectory t = resting_drone(10, 1.0);
  const std::vector<Vec3> vdes(11, Vec3{1, 0, 0});
  CHECK(discrete_cost(t, 0, vdes, {}, p) == Approx(5.0));
  p.eta = 0.1;
  double expected = 0.0;
  for (int k = 0; k < 10; ++k) expected += 0.5 * std::exp(-0.1 * k);
  CHECK(discrete_cost(t, 0, vdes, {}, p) == Approx(expected).epsilon(1e-12));
  CHECK(discrete_cost(t, 0, vdes, {}, p) == Approx(3.32127).epsilon(1e-5));

  // Cruising at the desired velocity costs nothing.
  p.eta = 0.0;
  JointTrajectory c = resting_drone(10, 1.0);
  for (int k = 0; k <= 10; ++k) {
    c.v[0][k] = {1, 0, 0};
    c.r[0][k] = {double(k), 0, 0};
  }
  DroneSpec spec;
  spec.target = {1000, 0, 0};
  const std::vector<DroneSpec> specs{spec};
  CHECK(discrete_cost(c, 0, specs, {}, p) == 0.0);
}
