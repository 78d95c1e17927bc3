#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pkmc/cost_model.hpp"
#include "pkmc/rng.hpp"
#include "support.hpp"

using namespace pkmc;
using pkmc::test::state_at;

namespace {

std::vector<MotionState> drive(MotionState s, const std::vector<Action>& actions, const VehicleParams& params) {
  std::vector<MotionState> out{s};
  for (const Action& a : actions) {
    s = transition(s, a, params);
    out.push_back(s);
  }
  return out;
}

Pose moved(const Pose& p, const Pose& by) {
  const double c = std::cos(by.heading), s = std::sin(by.heading);
  return Pose::make(by.position.x + c * p.position.x - s * p.position.y,
                    by.position.y + s * p.position.x + c * p.position.y, p.heading + by.heading);
}

}  // namespace

TEST_CASE("path_cost examples") {
  const CostWeights w;
  const Scenario lot = test::empty_lot();

  SUBCASE("single state") {
    const std::vector<MotionState> one{state_at(5, 10, 0)};
    const PathCost c = path_cost(one, lot, w);
    CHECK(c.safety == 0.0);
    CHECK(c.comfort == 0.0);
    CHECK(c.efficiency == 0.0);
    CHECK(c.total == 0.0);
  }
  SUBCASE("straight move") {
    const std::vector<MotionState> two = drive(state_at(5, 10, 0), {{0.8, 0.0}}, lot.vehicle);
    const PathCost c = path_cost(two, lot, w);
    CHECK(c.efficiency == doctest::Approx(-0.008).epsilon(1e-12));
    CHECK(c.total == doctest::Approx(-0.008).epsilon(1e-12));
    CHECK(c.safety == 0.0);
    CHECK(c.comfort == 0.0);
  }
  SUBCASE("one gear change") {
    const std::vector<MotionState> three = drive(state_at(5, 10, 0), {{0.8, 0.0}, {-0.8, 0.0}}, lot.vehicle);
    const PathCost c = path_cost(three, lot, w);
    CHECK(c.comfort == doctest::Approx(-0.05).epsilon(1e-12));
    CHECK(c.efficiency == doctest::Approx(-0.016).epsilon(1e-12));
  }
  SUBCASE("steer changes") {
    const std::vector<MotionState> path = drive(state_at(5, 10, 0), {{0.8, 0.6}, {0.8, -0.6}}, lot.vehicle);
    CHECK(path_cost(path, lot, w).comfort == doctest::Approx(-0.02 * 1.8).epsilon(1e-12));
  }
  SUBCASE("safety hinge") {
    Scenario near = lot;
    // Body spans y in [9, 11]; a pillar 0.2 m above it.
    test::add_box(near, ObstacleClass::pillar, 5.0, 11.2, 6.0, 12.0);
    const std::vector<MotionState> one{state_at(5, 10, 0)};
    CHECK(path_cost(one, near, w).safety == doctest::Approx(-0.1 * 0.3).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(path_cost(std::vector<MotionState>{}, lot, w), std::invalid_argument);
    Scenario blocked = lot;
    test::add_box(blocked, ObstacleClass::pillar, 5.5, 9.5, 6.5, 10.5);
    const std::vector<MotionState> one{state_at(5, 10, 0)};
    CHECK_THROWS_AS(path_cost(one, blocked, w), std::domain_error);
  }
  SUBCASE("total is clamped") {
    CostWeights heavy = w;
    heavy.w_dist = 1.0;
    const std::vector<MotionState> path = drive(state_at(5, 10, 0), {{0.8, 0.0}, {0.8, 0.0}}, lot.vehicle);
    const PathCost c = path_cost(path, lot, heavy);
    CHECK(c.sum() == doctest::Approx(-1.6));
    CHECK(c.total == -1.0);
  }
}

TEST_CASE("accumulator matches the batch computation") {
  const CostWeights w;
  Scenario s = test::empty_lot();
  test::add_box(s, ObstacleClass::vehicle, 9.0, 13.5, 11.0, 16.0);
  const CollisionChecker checker(s);
  const std::vector<MotionState> path =
      drive(state_at(5, 10, 0), {{0.8, 0.6}, {0.8, 0.6}, {-0.8, 0.0}, {0.8, -0.3}}, s.vehicle);
  CostAccumulator acc = CostAccumulator::start(path[0], safety_clearance(path[0], checker, w), w);
  for (std::size_t i = 1; i < path.size(); ++i) {
    acc = acc.extended(path[i - 1], path[i], safety_clearance(path[i], checker, w), w);
  }
  const PathCost a = acc.cost();
  const PathCost b = path_cost(path, s, w);
  CHECK(a.safety == b.safety);
  CHECK(a.comfort == b.comfort);
  CHECK(a.efficiency == b.efficiency);
  CHECK(a.total == b.total);
}

TEST_CASE("cost properties") {
  const CostWeights w;
  Rng rng(17);
  const ActionSet actions = make_action_set(VehicleParams{}, 7, 0.8);

  for (int trial = 0; trial < 40; ++trial) {
    Scenario s = test::empty_lot();
    s.bounds = {-100, -100, 100, 100};
    const double ox = rng.uniform(6, 9), oy = rng.uniform(12, 13);
    test::add_box(s, ObstacleClass::pillar, ox, oy, ox + 1.0, oy + 1.0);

    std::vector<MotionState> path{state_at(5, 10, 0)};
    const CollisionChecker checker(s);
    for (int k = 0; k < 6; ++k) {
      const MotionState next = transition(path.back(), actions[rng.below(actions.size())], s.vehicle);
      if (!checker.pose_free(next.pose)) break;
      path.push_back(next);
    }
    const PathCost base = path_cost(path, s, w);

    // Extending never raises the total.
    for (std::size_t n = 1; n < path.size(); ++n) {
      const std::span<const MotionState> prefix(path.data(), n);
      const std::span<const MotionState> longer(path.data(), n + 1);
      CHECK(path_cost(longer, s, w).total <= path_cost(prefix, s, w).total);
    }

    // Another obstacle never raises the safety term.
    Scenario more = s;
    const double px = rng.uniform(2, 12), py = rng.uniform(6.5, 7.5);
    test::add_box(more, ObstacleClass::pillar, px, py, px + 0.5, py + 0.5);
    bool clear = true;
    const CollisionChecker more_checker(more);
    for (const MotionState& st : path) clear = clear && more_checker.pose_free(st.pose);
    if (clear) CHECK(path_cost(path, more, w).safety <= base.safety);

    // Rigid motion of the whole problem.
    const Pose by = Pose::make(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-kPi, kPi));
    Scenario turned = s;
    for (Obstacle& o : turned.obstacles) o.polygon = o.polygon.transformed(by);
    std::vector<MotionState> turned_path = path;
    for (MotionState& st : turned_path) st.pose = moved(st.pose, by);
    const PathCost t = path_cost(turned_path, turned, w);
    CHECK(t.safety == doctest::Approx(base.safety).epsilon(1e-9));
    CHECK(t.comfort == doctest::Approx(base.comfort).epsilon(1e-9));
    CHECK(t.efficiency == doctest::Approx(base.efficiency).epsilon(1e-9));
  }
}

TEST_CASE("node_value") {
  PathCost zero;
  PathCost worst;
  worst.total = -1.0;
  CostWeights w;

  w.alpha0 = 1.0;
  w.alpha1 = 0.0;
  CHECK(node_value(0.3, worst, w) == 0.3);

  w.alpha0 = 0.5;
  w.alpha1 = 0.5;
  CHECK(node_value(1.0, zero, w) == 0.5);
  CHECK(node_value(0.0, worst, w) == -0.5);

  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    CostWeights r;
    r.alpha0 = rng.uniform();
    r.alpha1 = rng.uniform() * (1.0 - r.alpha0);
    PathCost c;
    c.total = -rng.uniform();
    const double v = node_value(rng.uniform(), c, r);
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("terminal_reward") {
  CHECK(terminal_reward(true) == 1.0);
  CHECK(terminal_reward(false) == 0.0);
  CHECK(terminal_reward(true) == terminal_reward(true));
}
