#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pkmc/hybrid_astar.hpp"
#include "pkmc/motion.hpp"
#include "pkmc/scenarios.hpp"
#include "support.hpp"

using namespace pkmc;
using pkmc::test::state_at;

namespace {

AStarConfig astar_config() {
  AStarConfig c;
  c.actions = make_action_set(VehicleParams{}, 7, 0.8);
  return c;
}

double length(const std::vector<MotionState>& path) {
  double sum = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) sum += distance(path[i - 1].pose.position, path[i].pose.position);
  return sum;
}

}  // namespace

TEST_CASE("heuristic examples") {
  const CostWeights w;
  const VehicleParams car;
  const Pose goal = Pose::make(10, 10, 0);
  CHECK(astar_heuristic(state_at(6, 10, 0), goal, car, w) == doctest::Approx(w.w_dist * 4.0).epsilon(1e-9));
  CHECK(astar_heuristic(state_at(10, 10, 0), goal, car, w) == doctest::Approx(0.0).epsilon(1e-12));

  VehicleParams unit;
  unit.wheelbase = std::tan(unit.max_steer);  // turn radius 1
  CHECK(astar_heuristic(state_at(0, 0, 0), Pose::make(0, 2, kPi), unit, w) ==
        doctest::Approx(w.w_dist * kPi).epsilon(1e-9));
}

TEST_CASE("grid keys") {
  const GridKey a = grid_key(state_at(1.04, 2.0, 0.004));
  const GridKey b = grid_key(state_at(1.16, 2.0, 0.004));
  CHECK(a.xi != b.xi);
  CHECK(a.yi == b.yi);
  MotionState back = state_at(1.04, 2.0, 0.004);
  back.gear = Gear::reverse;
  CHECK_FALSE(grid_key(back) == a);
  CHECK(grid_key(state_at(1.04, 2.0, 0.004)) == a);
  CHECK(GridKeyHash{}(a) == GridKeyHash{}(grid_key(state_at(1.04, 2.0, 0.004))));
}

TEST_CASE("plan examples") {
  SUBCASE("goal 3 m ahead") {
    const AStarResult r = hybrid_astar(test::empty_lot(), astar_config());
    REQUIRE(r.path);
    CHECK(length(*r.path) == doctest::Approx(3.0).epsilon(0.05));
    CHECK(r.termination == Termination::path_target);
  }
  SUBCASE("walled-off goal") {
    AStarConfig c = astar_config();
    c.cell = 0.5;
    c.heading_bin = 0.2;
    c.node_limit = 2000000;
    const AStarResult r = hybrid_astar(test::walled_goal(), c);
    CHECK_FALSE(r.path);
    CHECK(r.termination == Termination::exhausted);
  }
  SUBCASE("node limit") {
    AStarConfig c = astar_config();
    c.node_limit = 500;
    const AStarResult r = hybrid_astar(test::walled_goal(), c);
    CHECK_FALSE(r.path);
    CHECK(r.termination == Termination::node_limit);
    CHECK(r.nodes_created <= 500);
  }
  SUBCASE("deterministic") {
    GenSpec g = GenSpec::defaults(ScenarioKind::perpendicular);
    g.count = 1;
    g.seed = 4;
    const Scenario s = generate(g).front();
    const AStarResult a = hybrid_astar(s, astar_config());
    const AStarResult b = hybrid_astar(s, astar_config());
    CHECK(a.nodes_created == b.nodes_created);
    CHECK(a.nodes_expanded == b.nodes_expanded);
    CHECK(a.termination == b.termination);
    REQUIRE(a.path.has_value() == b.path.has_value());
    if (a.path) {
      REQUIRE(a.path->size() == b.path->size());
      for (std::size_t i = 0; i < a.path->size(); ++i) CHECK((*a.path)[i].pose == (*b.path)[i].pose);
    }
  }
  SUBCASE("collisions at the ends") {
    Scenario s = test::empty_lot();
    test::add_box(s, ObstacleClass::pillar, 5.5, 9.5, 6.5, 10.5);
    CHECK_THROWS_AS(hybrid_astar(s, astar_config()), PlanningError);
    AStarConfig bad = astar_config();
    bad.cell = 0.0;
    CHECK_THROWS_AS(hybrid_astar(test::empty_lot(), bad), std::invalid_argument);
  }
}

TEST_CASE("returned paths are feasible with nondecreasing cost") {
  for (ScenarioKind kind : {ScenarioKind::parallel, ScenarioKind::perpendicular, ScenarioKind::diagonal}) {
    GenSpec g = GenSpec::defaults(kind);
    g.count = 4;
    g.seed = 21;
    for (const Scenario& s : generate(g)) {
      const AStarResult r = hybrid_astar(s, astar_config());
      if (!r.path) continue;
      const CollisionChecker checker(s);
      const std::vector<MotionState>& p = *r.path;
      REQUIRE(r.tree_states <= p.size());
      for (std::size_t i = 1; i < r.tree_states; ++i) CHECK(feasible(p[i - 1], p[i], s.vehicle, checker));
      for (std::size_t i = 1; i < r.g.size(); ++i) CHECK(r.g[i] >= r.g[i - 1]);
      CHECK(dubins_connects(p[r.tree_states - 1].pose, s.goal, s.vehicle, checker));
      CHECK(p.back().pose.position.x == doctest::Approx(s.goal.position.x));
      CHECK(p.back().pose.position.y == doctest::Approx(s.goal.position.y));
    }
  }
}

TEST_CASE("Dijkstra mode against the guided search") {
  Rng rng(31);
  int searched = 0;
  for (int trial = 0; trial < 10; ++trial) {
    // Poses near the edge make some direct connections leave the lot.
    Scenario s = test::empty_lot();
    s.start = state_at(rng.uniform(2.5, 17.5), rng.uniform(2.5, 17.5), rng.uniform(-kPi, kPi));
    s.goal = Pose::make(rng.uniform(2.5, 17.5), rng.uniform(2.5, 17.5), rng.uniform(-kPi, kPi));
    AStarConfig guided = astar_config();
    guided.node_limit = 200000;
    AStarConfig dijkstra = guided;
    dijkstra.heuristic_weight = 0.0;
    const AStarResult a = hybrid_astar(s, guided);
    const AStarResult d = hybrid_astar(s, dijkstra);
    // The goal test is a free connection, not arrival, so the heuristic can
    // pull the search past poses Dijkstra would stop at. Expansion counts are
    // therefore not compared.
    if (!a.path || !d.path) continue;
    if (a.nodes_expanded > 1) ++searched;
    INFO("trial ", trial);
    CHECK(path_cost(*d.path, s, guided.weights).sum() >= path_cost(*a.path, s, guided.weights).sum() - 1e-9);
  }
  CHECK(searched > 0);
}
