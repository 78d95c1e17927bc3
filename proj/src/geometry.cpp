#include "pkmc/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace pkmc {

double normalize_angle(double angle) {
  if (angle >= -kPi && angle < kPi) {
    return angle;
  }
  double wrapped = std::fmod(angle + kPi, kTwoPi);
  if (wrapped < 0.0) {
    wrapped += kTwoPi;
  }
  double out = wrapped - kPi;
  // fmod rounding can land exactly on +pi
  if (out >= kPi) {
    out -= kTwoPi;
  }
  return out;
}

ConvexPolygon::ConvexPolygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.empty()) {
    return;
  }
  Point2 sum;
  for (const Point2& v : vertices_) {
    sum = sum + v;
  }
  center_ = (1.0 / static_cast<double>(vertices_.size())) * sum;
  for (const Point2& v : vertices_) {
    radius_ = std::max(radius_, distance(center_, v));
  }
}

bool ConvexPolygon::valid() const {
  const std::size_t n = vertices_.size();
  if (n < 3) {
    return false;
  }
  for (const Point2& v : vertices_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = vertices_[i];
    const Point2& b = vertices_[(i + 1) % n];
    const Point2& c = vertices_[(i + 2) % n];
    if (cross(b - a, c - b) <= 0.0) {
      return false;
    }
  }
  // Every left turn but the polygon could still wind twice around.
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e0 = vertices_[(i + 1) % n] - vertices_[i];
    const Point2 e1 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    turning += std::atan2(cross(e0, e1), dot(e0, e1));
  }
  return std::fabs(turning - kTwoPi) < 1e-6;
}

double ConvexPolygon::area() const {
  double twice = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(vertices_[i], vertices_[(i + 1) % n]);
  }
  return 0.5 * twice;
}

double ConvexPolygon::min_x() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Point2& v : vertices_) m = std::min(m, v.x);
  return m;
}
double ConvexPolygon::max_x() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const Point2& v : vertices_) m = std::max(m, v.x);
  return m;
}
double ConvexPolygon::min_y() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Point2& v : vertices_) m = std::min(m, v.y);
  return m;
}
double ConvexPolygon::max_y() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const Point2& v : vertices_) m = std::max(m, v.y);
  return m;
}

bool ConvexPolygon::contains(Point2 p) const {
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = vertices_[i];
    const Point2& b = vertices_[(i + 1) % n];
    if (cross(b - a, p - a) < 0.0) {
      return false;
    }
  }
  return n >= 3;
}

ConvexPolygon ConvexPolygon::transformed(const Pose& pose) const {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  std::vector<Point2> out;
  out.reserve(vertices_.size());
  for (const Point2& v : vertices_) {
    out.push_back({pose.position.x + c * v.x - s * v.y, pose.position.y + s * v.x + c * v.y});
  }
  return ConvexPolygon(std::move(out));
}

ConvexPolygon make_rectangle(double min_x, double min_y, double max_x, double max_y) {
  return ConvexPolygon({{min_x, min_y}, {max_x, min_y}, {max_x, max_y}, {min_x, max_y}});
}

ConvexPolygon make_oriented_box(Point2 center, double heading, double length, double width) {
  const ConvexPolygon local =
      make_rectangle(-0.5 * length, -0.5 * width, 0.5 * length, 0.5 * width);
  return local.transformed(Pose{center, heading});
}

ConvexPolygon footprint_polygon(const VehicleFootprint& footprint, const Pose& pose) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double rear = -footprint.rear_overhang;
  const double front = footprint.length - footprint.rear_overhang;
  const double half = 0.5 * footprint.width;
  const Point2 local[4] = {{rear, -half}, {front, -half}, {front, half}, {rear, half}};
  std::vector<Point2> out;
  out.reserve(4);
  for (const Point2& v : local) {
    out.push_back({pose.position.x + c * v.x - s * v.y, pose.position.y + s * v.x + c * v.y});
  }
  return ConvexPolygon(std::move(out));
}

namespace {

// True if some edge normal of `a` separates the two polygons.
bool has_separating_axis(const ConvexPolygon& a, const ConvexPolygon& b) {
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  const std::size_t n = va.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 edge = va[(i + 1) % n] - va[i];
    const Point2 axis{edge.y, -edge.x};
    double a_min = std::numeric_limits<double>::infinity();
    double a_max = -a_min;
    for (const Point2& p : va) {
      const double d = dot(axis, p);
      a_min = std::min(a_min, d);
      a_max = std::max(a_max, d);
    }
    double b_min = std::numeric_limits<double>::infinity();
    double b_max = -b_min;
    for (const Point2& p : vb) {
      const double d = dot(axis, p);
      b_min = std::min(b_min, d);
      b_max = std::max(b_max, d);
    }
    if (a_max < b_min || b_max < a_min) {
      return true;
    }
  }
  return false;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

}  // namespace

bool polygons_intersect(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (distance(a.center(), b.center()) > a.radius() + b.radius()) {
    return false;
  }
  return !has_separating_axis(a, b) && !has_separating_axis(b, a);
}

double polygon_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
  double best = std::numeric_limits<double>::infinity();
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  for (std::size_t i = 0; i < vb.size(); ++i) {
    const Point2 s0 = vb[i];
    const Point2 s1 = vb[(i + 1) % vb.size()];
    for (const Point2& p : va) {
      best = std::min(best, point_segment_distance(p, s0, s1));
    }
  }
  for (std::size_t i = 0; i < va.size(); ++i) {
    const Point2 s0 = va[i];
    const Point2 s1 = va[(i + 1) % va.size()];
    for (const Point2& p : vb) {
      best = std::min(best, point_segment_distance(p, s0, s1));
    }
  }
  return best;
}

double min_clearance(const ConvexPolygon& poly, std::span<const ConvexPolygon> obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (const ConvexPolygon& obstacle : obstacles) {
    if (polygons_intersect(poly, obstacle)) {
      throw std::domain_error("min_clearance: polygon is in collision");
    }
    best = std::min(best, polygon_distance(poly, obstacle));
  }
  return best;
}

std::size_t OccupancyLayer::occupied_count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

void rasterize_into(OccupancyLayer& layer, const ConvexPolygon& polygon) {
  const double inv = 1.0 / layer.resolution;
  // Cell centres inside [lo, hi] satisfy lo <= origin + res*(i+0.5) <= hi.
  const int ix0 = std::max(0, static_cast<int>(std::floor((polygon.min_x() - layer.origin.x) * inv - 0.5)));
  const int ix1 = std::min(layer.width - 1,
                           static_cast<int>(std::ceil((polygon.max_x() - layer.origin.x) * inv - 0.5)));
  const int iy0 = std::max(0, static_cast<int>(std::floor((polygon.min_y() - layer.origin.y) * inv - 0.5)));
  const int iy1 = std::min(layer.height - 1,
                           static_cast<int>(std::ceil((polygon.max_y() - layer.origin.y) * inv - 0.5)));
  for (int iy = iy0; iy <= iy1; ++iy) {
    const double cy = layer.origin.y + layer.resolution * (iy + 0.5);
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double cx = layer.origin.x + layer.resolution * (ix + 0.5);
      if (polygon.contains({cx, cy})) {
        layer.cells[static_cast<std::size_t>(iy) * static_cast<std::size_t>(layer.width) +
                    static_cast<std::size_t>(ix)] = 1;
      }
    }
  }
}

OccupancyLayer rasterize(std::span<const ConvexPolygon> polygons, Point2 origin, double resolution,
                         int width, int height) {
  if (!(resolution > 0.0) || width < 0 || height < 0) {
    throw std::invalid_argument("rasterize: bad grid shape");
  }
  OccupancyLayer layer;
  layer.origin = origin;
  layer.resolution = resolution;
  layer.width = width;
  layer.height = height;
  layer.cells.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  for (const ConvexPolygon& polygon : polygons) {
    rasterize_into(layer, polygon);
  }
  return layer;
}

}  // namespace pkmc
