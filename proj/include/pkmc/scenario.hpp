#pragma once

#include <string>
#include <vector>

#include "pkmc/geometry.hpp"
#include "pkmc/vehicle.hpp"

namespace pkmc {

enum class ScenarioKind { parallel, perpendicular, diagonal };
enum class ObstacleClass { vehicle, curb, pillar };

inline constexpr int kObstacleClassCount = 3;

const char* to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);
const char* to_string(ObstacleClass cls);
ObstacleClass obstacle_class_from_string(const std::string& name);

struct WorldBounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 20.0;
  double max_y = 20.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(Point2 p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  bool contains(const ConvexPolygon& poly) const;
  friend bool operator==(const WorldBounds&, const WorldBounds&) = default;
};

struct Obstacle {
  ObstacleClass cls = ObstacleClass::vehicle;
  ConvexPolygon polygon;

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

/// One planning problem: a static parking lot plus start and goal. The
/// obstacle set is the constant observation of the search.
struct Scenario {
  std::string id;
  ScenarioKind kind = ScenarioKind::parallel;
  WorldBounds bounds;
  std::vector<Obstacle> obstacles;
  MotionState start;
  Pose goal;
  VehicleParams vehicle;

  /// Obstacle polygons in declaration order, for the geometry routines.
  std::vector<ConvexPolygon> obstacle_polygons() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Collision world derived from a scenario; cheap to query repeatedly.
class CollisionChecker {
 public:
  explicit CollisionChecker(const Scenario& scenario);

  /// Footprint inside bounds and touching no obstacle.
  bool pose_free(const Pose& pose) const;
  bool polygon_free(const ConvexPolygon& poly) const;

  /// min(limit, clearance) so callers that only need a hinge can skip far
  /// obstacles. Throws std::domain_error on collision.
  double clearance(const ConvexPolygon& poly, double limit) const;

  const VehicleFootprint& footprint() const { return footprint_; }
  const std::vector<ConvexPolygon>& obstacles() const { return obstacles_; }

 private:
  WorldBounds bounds_;
  VehicleFootprint footprint_;
  std::vector<ConvexPolygon> obstacles_;
};

}  // namespace pkmc
