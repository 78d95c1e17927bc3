#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pkmc {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wraps an angle into [-pi, pi).
double normalize_angle(double angle);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Rear-axle position and heading. Heading is kept in [-pi, pi) by every
/// operation that produces a Pose.
struct Pose {
  Point2 position;
  double heading = 0.0;

  static Pose make(double x, double y, double heading) {
    return Pose{{x, y}, normalize_angle(heading)};
  }
  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Counterclockwise convex polygon.
///
/// Construction does not reject bad input so that scenario validation can
/// report it; geometric queries assume valid() holds.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }

  /// >= 3 vertices, strictly convex, counterclockwise.
  bool valid() const;
  double area() const;

  /// Bounding circle used for cheap rejection.
  Point2 center() const { return center_; }
  double radius() const { return radius_; }

  double min_x() const;
  double max_x() const;
  double min_y() const;
  double max_y() const;

  bool contains(Point2 p) const;  // inside or on the boundary

  ConvexPolygon transformed(const Pose& pose) const;  // rotate then translate

  friend bool operator==(const ConvexPolygon& a, const ConvexPolygon& b) {
    return a.vertices_ == b.vertices_;
  }

 private:
  std::vector<Point2> vertices_;
  Point2 center_;
  double radius_ = 0.0;
};

ConvexPolygon make_rectangle(double min_x, double min_y, double max_x, double max_y);

/// Oriented rectangle centred at `center` with the given extent along `heading`.
ConvexPolygon make_oriented_box(Point2 center, double heading, double length, double width);

struct VehicleFootprint {
  double length = 4.0;
  double width = 2.0;
  double rear_overhang = 1.0;  // rear axle to rear bumper

  bool valid() const {
    return length > 0.0 && width > 0.0 && rear_overhang >= 0.0 && rear_overhang < length;
  }
  friend bool operator==(const VehicleFootprint&, const VehicleFootprint&) = default;
};

/// Body rectangle at `pose`; the rear axle sits at pose.position.
ConvexPolygon footprint_polygon(const VehicleFootprint& footprint, const Pose& pose);

/// Separating-axis test. Boundary contact counts as intersection.
bool polygons_intersect(const ConvexPolygon& a, const ConvexPolygon& b);

/// Distance between two non-intersecting polygons.
double polygon_distance(const ConvexPolygon& a, const ConvexPolygon& b);

/// Minimum distance from `poly` to any obstacle, +inf with no obstacles.
/// Throws std::domain_error if `poly` touches an obstacle.
double min_clearance(const ConvexPolygon& poly, std::span<const ConvexPolygon> obstacles);

/// One binary occupancy layer. Cell (ix, iy) has its centre at
/// origin + resolution * (ix + 0.5, iy + 0.5); storage is row-major in iy.
struct OccupancyLayer {
  Point2 origin;
  double resolution = 1.0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(int ix, int iy) const {
    return cells[static_cast<std::size_t>(iy) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(ix)];
  }
  std::size_t occupied_count() const;
};

/// Stack of same-shaped layers, one per object class.
struct OccupancyGrid {
  std::vector<OccupancyLayer> layers;
};

/// Marks every cell whose centre lies inside or on any polygon.
OccupancyLayer rasterize(std::span<const ConvexPolygon> polygons, Point2 origin,
                         double resolution, int width, int height);

/// Sets cells of an existing layer for one polygon (centre-membership rule).
void rasterize_into(OccupancyLayer& layer, const ConvexPolygon& polygon);

}  // namespace pkmc
