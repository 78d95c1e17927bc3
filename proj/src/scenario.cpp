#include "pkmc/scenario.hpp"

#include <algorithm>
#include <stdexcept>

namespace pkmc {

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::parallel:
      return "parallel";
    case ScenarioKind::perpendicular:
      return "perpendicular";
    case ScenarioKind::diagonal:
      return "diagonal";
  }
  return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "parallel") return ScenarioKind::parallel;
  if (name == "perpendicular") return ScenarioKind::perpendicular;
  if (name == "diagonal") return ScenarioKind::diagonal;
  throw std::invalid_argument("unknown scenario kind '" + name + "'");
}

const char* to_string(ObstacleClass cls) {
  switch (cls) {
    case ObstacleClass::vehicle:
      return "vehicle";
    case ObstacleClass::curb:
      return "curb";
    case ObstacleClass::pillar:
      return "pillar";
  }
  return "?";
}

ObstacleClass obstacle_class_from_string(const std::string& name) {
  if (name == "vehicle") return ObstacleClass::vehicle;
  if (name == "curb") return ObstacleClass::curb;
  if (name == "pillar") return ObstacleClass::pillar;
  throw std::invalid_argument("unknown obstacle class '" + name + "'");
}

bool WorldBounds::contains(const ConvexPolygon& poly) const {
  return std::all_of(poly.vertices().begin(), poly.vertices().end(),
                     [this](Point2 p) { return contains(p); });
}

std::vector<ConvexPolygon> Scenario::obstacle_polygons() const {
  std::vector<ConvexPolygon> out;
  out.reserve(obstacles.size());
  for (const Obstacle& o : obstacles) {
    out.push_back(o.polygon);
  }
  return out;
}

CollisionChecker::CollisionChecker(const Scenario& scenario)
    : bounds_(scenario.bounds),
      footprint_(scenario.vehicle.footprint),
      obstacles_(scenario.obstacle_polygons()) {}

bool CollisionChecker::polygon_free(const ConvexPolygon& poly) const {
  if (!bounds_.contains(poly)) {
    return false;
  }
  for (const ConvexPolygon& obstacle : obstacles_) {
    if (polygons_intersect(poly, obstacle)) {
      return false;
    }
  }
  return true;
}

bool CollisionChecker::pose_free(const Pose& pose) const {
  return polygon_free(footprint_polygon(footprint_, pose));
}

double CollisionChecker::clearance(const ConvexPolygon& poly, double limit) const {
  double best = limit;
  for (const ConvexPolygon& obstacle : obstacles_) {
    const double gap = distance(poly.center(), obstacle.center()) - poly.radius() - obstacle.radius();
    if (gap >= best) {
      continue;
    }
    if (polygons_intersect(poly, obstacle)) {
      throw std::domain_error("clearance: polygon is in collision");
    }
    best = std::min(best, polygon_distance(poly, obstacle));
  }
  return best;
}

}  // namespace pkmc
