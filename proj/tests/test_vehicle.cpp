#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pkmc/dubins.hpp"
#include "pkmc/motion.hpp"
#include "pkmc/rng.hpp"
#include "pkmc/vehicle.hpp"
#include "support.hpp"

using namespace pkmc;
using pkmc::test::state_at;

namespace {

// Vehicle whose tightest turn radius is exactly `radius` to rounding.
VehicleParams with_radius(double radius) {
  VehicleParams p;
  p.max_steer = 0.6;
  p.wheelbase = radius * std::tan(p.max_steer);
  return p;
}

Scenario lot_for(const VehicleParams& params) {
  Scenario s = test::empty_lot();
  s.vehicle = params;
  return s;
}

}  // namespace

TEST_CASE("transition examples") {
  const VehicleParams params;
  const MotionState origin = state_at(0, 0, 0);

  const MotionState fwd = transition(origin, {1.0, 0.0}, params);
  CHECK(fwd.pose == Pose::make(1.0, 0.0, 0.0));
  CHECK(fwd.gear == Gear::forward);

  const MotionState rev = transition(origin, {-1.0, 0.0}, params);
  CHECK(rev.pose == Pose::make(-1.0, 0.0, 0.0));
  CHECK(rev.gear == Gear::reverse);

  const MotionState turn = transition(origin, {0.5, std::atan(0.5)}, params);
  CHECK(turn.pose.position.x == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(turn.pose.position.y == 0.0);
  CHECK(turn.pose.heading == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(turn.steer == std::atan(0.5));
}

TEST_CASE("straight moves reverse exactly on representable states") {
  const VehicleParams params;
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const double x = static_cast<double>(rng.below(1281)) / 64.0 - 10.0;
    const double y = static_cast<double>(rng.below(1281)) / 64.0 - 10.0;
    const double d = static_cast<double>(1 + rng.below(16)) / 8.0;
    const MotionState s{Pose::make(x, y, 0.0), Gear::forward, 0.0};
    const MotionState back = transition(transition(s, {d, 0.0}, params), {-d, 0.0}, params);
    CHECK(back.pose == s.pose);
  }
}

TEST_CASE("straight moves reverse to rounding on arbitrary states") {
  const VehicleParams params;
  Rng rng(22);
  for (int i = 0; i < 1000; ++i) {
    const MotionState s = state_at(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-kPi, kPi));
    const double d = rng.uniform(0.1, 2.0);
    const MotionState back = transition(transition(s, {d, 0.0}, params), {-d, 0.0}, params);
    CHECK(distance(back.pose.position, s.pose.position) < 1e-12);
    CHECK(back.pose.heading == s.pose.heading);
  }
}

TEST_CASE("small steps follow the circle") {
  const VehicleParams params;
  for (double steer : {0.2, 0.45, 0.6, -0.6}) {
    const double radius = params.wheelbase / std::tan(steer);  // signed
    const double step = 0.01;
    const double arc = 0.5 * kPi * std::fabs(radius);
    MotionState s = state_at(0, 0, 0);
    double travelled = 0.0;
    while (travelled + step <= arc) {
      s = transition(s, {step, steer}, params);
      travelled += step;
    }
    const double phi = travelled / radius;
    CHECK(std::hypot(s.pose.position.x - radius * std::sin(phi),
                     s.pose.position.y - radius * (1.0 - std::cos(phi))) < 0.01);
    CHECK(s.pose.heading == doctest::Approx(phi).epsilon(1e-9));
  }
}

TEST_CASE("heading stays in [-pi, pi)") {
  const VehicleParams params;
  Rng rng(8);
  MotionState s = state_at(0, 0, 0);
  for (int i = 0; i < 5000; ++i) {
    s = transition(s, {rng.uniform(-3.0, 3.0), rng.uniform(-0.6, 0.6)}, params);
    CHECK(s.pose.heading >= -kPi);
    CHECK(s.pose.heading < kPi);
  }
}

TEST_CASE("make_action_set") {
  const VehicleParams params;

  SUBCASE("three steer levels") {
    const ActionSet a = make_action_set(params, 3, 0.8);
    const std::vector<Action> expected{{0.8, -0.6}, {0.8, 0.0}, {0.8, 0.6},
                                       {-0.8, -0.6}, {-0.8, 0.0}, {-0.8, 0.6}};
    CHECK(a.actions() == expected);
  }
  SUBCASE("five steer levels") {
    const ActionSet a = make_action_set(params, 5, 0.8);
    REQUIRE(a.size() == 10);
    const double levels[] = {-0.6, -0.3, 0.0, 0.3, 0.6};
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(a[i].steer == doctest::Approx(levels[i]).epsilon(1e-15));
      CHECK(a[i + 5].steer == a[i].steer);
      CHECK(a[i].distance == 0.8);
      CHECK(a[i + 5].distance == -0.8);
    }
    CHECK(a[2].steer == 0.0);
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(make_action_set(params, 4, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(make_action_set(params, 1, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(make_action_set(params, 3, 0.0), std::invalid_argument);
  }
}

TEST_CASE("feasible") {
  const VehicleParams params;
  Scenario s = test::empty_lot();
  const MotionState from = state_at(5, 10, 0);

  SUBCASE("straight move in an empty lot") {
    CHECK(feasible(from, transition(from, {1.0, 0.0}, params), s));
  }
  SUBCASE("end pose on an obstacle") {
    test::add_box(s, ObstacleClass::pillar, 8.5, 9.5, 9.5, 10.5);
    CHECK_FALSE(feasible(from, transition(from, {1.0, 0.0}, params), s));
  }
  SUBCASE("leaving the bounds") {
    const MotionState edge = state_at(16.5, 10, 0);
    CHECK_FALSE(feasible(edge, transition(edge, {1.0, 0.0}, params), s));
  }
  SUBCASE("midpoint clips a corner") {
    // Find a point swept by the middle of a hard turn that neither endpoint
    // body covers, using a dense sweep.
    const MotionState to = transition(from, {0.8, 0.6}, params);
    const ConvexPolygon body0 = footprint_polygon(params.footprint, from.pose);
    const ConvexPolygon body1 = footprint_polygon(params.footprint, to.pose);
    const std::vector<Pose> dense = motion_samples(from, to, params, 0.01);
    std::optional<Point2> target;
    REQUIRE(dense.size() == 81);
    const ConvexPolygon mid = footprint_polygon(params.footprint, dense[40]);
    for (const Point2& v : mid.vertices()) {
      const Point2 inward = v + 0.002 * (mid.center() - v);
      if (mid.contains(inward) && !body0.contains(inward) && !body1.contains(inward)) {
        target = inward;
        break;
      }
    }
    REQUIRE(target.has_value());
    const double e = 0.0005;
    test::add_box(s, ObstacleClass::pillar, target->x - e, target->y - e, target->x + e, target->y + e);
    CHECK_FALSE(polygons_intersect(body0, s.obstacles.back().polygon));
    CHECK_FALSE(polygons_intersect(body1, s.obstacles.back().polygon));
    CHECK_FALSE(feasible(from, to, s));
  }
  SUBCASE("adding obstacles never makes a move feasible") {
    Rng rng(13);
    const ActionSet actions = make_action_set(params, 7, 0.8);
    for (int i = 0; i < 50; ++i) {
      const MotionState a = state_at(rng.uniform(4, 16), rng.uniform(4, 16), rng.uniform(-kPi, kPi));
      const MotionState b = transition(a, actions[rng.below(actions.size())], params);
      Scenario more = s;
      const double cx = rng.uniform(2, 18), cy = rng.uniform(2, 18);
      test::add_box(more, ObstacleClass::pillar, cx - 0.5, cy - 0.5, cx + 0.5, cy + 0.5);
      if (!feasible(a, b, s)) CHECK_FALSE(feasible(a, b, more));
    }
  }
}

TEST_CASE("motion samples stay within the spacing") {
  const VehicleParams params;
  const MotionState from = state_at(5, 5, 0.3);
  const MotionState to = transition(from, {-0.8, 0.6}, params);
  const std::vector<Pose> poses = motion_samples(from, to, params);
  CHECK(poses.size() == 9);
  CHECK(poses.front() == from.pose);
  CHECK(poses.back() == to.pose);
  // Spacing is uniform in arc length; the endpoint correction stretches it slightly.
  for (std::size_t i = 1; i < poses.size(); ++i) CHECK(distance(poses[i - 1].position, poses[i].position) <= 0.105);
}

TEST_CASE("dubins_connects") {
  const VehicleParams params = with_radius(1.0);
  Scenario s = lot_for(params);

  SUBCASE("straight ahead") {
    const auto len = dubins_connects(Pose::make(5, 5, 0), Pose::make(9, 5, 0), params, s);
    REQUIRE(len.has_value());
    CHECK(*len == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("left semicircle") {
    const auto len = dubins_connects(Pose::make(5, 5, 0), Pose::make(5, 7, kPi), params, s);
    REQUIRE(len.has_value());
    CHECK(*len == doctest::Approx(kPi).epsilon(1e-9));
    const auto path = shortest_dubins(Pose::make(5, 5, 0), Pose::make(5, 7, kPi), 1.0);
    REQUIRE(path.has_value());
    CHECK(path->sample(0.5 * kPi).position.x == doctest::Approx(6.0));
    CHECK(path->sample(0.5 * kPi).position.y == doctest::Approx(6.0));
  }
  SUBCASE("wall across the way") {
    test::add_box(s, ObstacleClass::curb, 7.0, 0.0, 7.2, 20.0);
    CHECK_FALSE(dubins_connects(Pose::make(5, 5, 0), Pose::make(9, 5, 0), params, s).has_value());
  }
  SUBCASE("length is at least the straight-line distance") {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
      const Pose a = Pose::make(rng.uniform(5, 15), rng.uniform(5, 15), rng.uniform(-kPi, kPi));
      const Pose b = Pose::make(rng.uniform(5, 15), rng.uniform(5, 15), rng.uniform(-kPi, kPi));
      const auto path = shortest_dubins(a, b, 3.0);
      REQUIRE(path.has_value());
      CHECK(path->length() >= distance(a.position, b.position) - 1e-9);
      CHECK(distance(path->sample(path->length()).position, b.position) < 1e-6);
      for (const DubinsPath& other : all_dubins(a, b, 3.0)) CHECK(path->length() <= other.length() + 1e-12);
    }
  }
}

TEST_CASE("closing segment ends on the goal") {
  const VehicleParams params;
  const Pose from = Pose::make(4, 6, 0.2);
  const Pose to = Pose::make(12, 11, 1.4);
  const std::vector<MotionState> tail = closing_segment(from, to, params);
  REQUIRE(!tail.empty());
  CHECK(tail.back().pose == to);
  Point2 last = from.position;
  for (const MotionState& s : tail) {
    CHECK(s.gear == Gear::forward);
    CHECK(std::fabs(s.steer) <= params.max_steer + 1e-12);
    CHECK(distance(last, s.pose.position) <= 0.1 + 1e-9);
    last = s.pose.position;
  }
}
