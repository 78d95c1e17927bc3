#pragma once

#include <vector>

#include "pkmc/scenario.hpp"

namespace pkmc::test {

inline MotionState state_at(double x, double y, double heading) {
  return MotionState{Pose::make(x, y, heading), Gear::forward, 0.0};
}

/// Obstacle-free 20 x 20 lot with the start at (3, 10) facing +x.
inline Scenario empty_lot(Pose goal = Pose::make(6.0, 10.0, 0.0)) {
  Scenario s;
  s.id = "test-empty";
  s.kind = ScenarioKind::perpendicular;
  s.start = state_at(3.0, 10.0, 0.0);
  s.goal = goal;
  return s;
}

inline void add_box(Scenario& s, ObstacleClass cls, double x0, double y0, double x1, double y1) {
  s.obstacles.push_back(Obstacle{cls, make_rectangle(x0, y0, x1, y1)});
}

/// Goal enclosed by a thin wall box that leaves the start outside.
inline Scenario walled_goal() {
  Scenario s = empty_lot(Pose::make(12.0, 10.0, 0.0));
  add_box(s, ObstacleClass::curb, 9.0, 6.0, 9.3, 14.0);
  add_box(s, ObstacleClass::curb, 16.7, 6.0, 17.0, 14.0);
  add_box(s, ObstacleClass::curb, 9.0, 6.0, 17.0, 6.3);
  add_box(s, ObstacleClass::curb, 9.0, 13.7, 17.0, 14.0);
  return s;
}

}  // namespace pkmc::test
