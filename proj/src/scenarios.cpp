#include "pkmc/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_fields.hpp"
#include "pkmc/dubins.hpp"
#include "pkmc/rng.hpp"

namespace pkmc {

Range GenSpec::default_slot_size(ScenarioKind kind, const VehicleParams& vehicle) {
  if (kind == ScenarioKind::parallel) {
    return {vehicle.footprint.length + 0.6, vehicle.footprint.length + 1.4};
  }
  return {vehicle.footprint.width + 0.6, vehicle.footprint.width + 1.4};
}

GenSpec GenSpec::defaults(ScenarioKind kind) {
  GenSpec spec;
  spec.kind = kind;
  spec.slot_size = default_slot_size(kind, spec.vehicle);
  return spec;
}

std::string scenario_id(const GenSpec& spec, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%s-%04llu-%03zu", spec.empty_lot ? "empty-" : "", to_string(spec.kind),
                static_cast<unsigned long long>(spec.seed), index);
  return buf;
}

namespace {

constexpr int kMaxAttempts = 100;
constexpr double kCurbDepth = 0.4;

// Rear-axle pose whose footprint is centred on `center`.
Pose pose_for_center(Point2 center, double heading, const VehicleFootprint& fp) {
  const double ahead = fp.length / 2.0 - fp.rear_overhang;
  return Pose::make(center.x - ahead * std::cos(heading), center.y - ahead * std::sin(heading), heading);
}

Pose turned_around(const Pose& pose, const VehicleFootprint& fp) {
  const double ahead = fp.length / 2.0 - fp.rear_overhang;
  const Point2 center{pose.position.x + ahead * std::cos(pose.heading), pose.position.y + ahead * std::sin(pose.heading)};
  return pose_for_center(center, pose.heading + kPi, fp);
}

double jitter(Rng& rng, double amount) { return amount > 0.0 ? rng.uniform(-amount, amount) : 0.0; }

struct Layout {
  std::vector<Obstacle> obstacles;
  Pose slot_pose;  // vehicle parked in the slot
  Pose free_pose;  // vehicle in the aisle
};

void add_box(Layout& layout, ObstacleClass cls, Point2 center, double heading, double length, double width) {
  layout.obstacles.push_back({cls, make_oriented_box(center, heading, length, width)});
}

// Parked cars along the x axis, sideways-on (parallel) or nose-in
// (perpendicular, diagonal). `pitch` maps a car's lateral size to its
// footprint along the row.
Layout parallel_layout(const GenSpec& spec, Rng& rng) {
  const WorldBounds& b = spec.bounds;
  const VehicleFootprint& fp = spec.vehicle.footprint;
  Layout out;
  out.obstacles.push_back({ObstacleClass::curb, make_rectangle(b.min_x, b.min_y, b.max_x, b.min_y + kCurbDepth)});

  const double slot = rng.uniform(spec.slot_size.lo, spec.slot_size.hi);
  const double row_y = b.min_y + kCurbDepth + 0.3 + fp.width / 2.0;
  const double slot_begin = b.min_x + rng.uniform(0.3, 0.45) * b.width();
  const double slot_end = slot_begin + slot;

  // Neighbours touching the slot, then the rest of the row.
  for (int dir : {-1, 1}) {
    double edge = dir < 0 ? slot_begin : slot_end;
    bool first = true;
    for (;;) {
      const double length = rng.uniform(4.0, 4.8);
      const double gap = first ? 0.0 : rng.uniform(0.8, 1.6);
      const double near = edge + dir * gap;
      const double far = near + dir * length;
      if (far < b.min_x + 0.1 || far > b.max_x - 0.1) break;
      add_box(out, ObstacleClass::vehicle, {(near + far) / 2.0, row_y + jitter(rng, 0.1)}, 0.0, length,
              rng.uniform(1.8, 2.0));
      edge = far;
      first = false;
    }
  }

  const double center_x = (slot_begin + slot_end) / 2.0 + jitter(rng, spec.position_jitter);
  out.slot_pose = pose_for_center({center_x, row_y + jitter(rng, spec.position_jitter)},
                                  jitter(rng, spec.heading_jitter), fp);
  const double goal_x = slot_end + rng.uniform(spec.goal_distance.lo, spec.goal_distance.hi);
  out.free_pose = pose_for_center({goal_x, row_y + rng.uniform(3.5, 5.5)}, jitter(rng, spec.heading_jitter), fp);
  return out;
}

Layout angled_layout(const GenSpec& spec, Rng& rng, double angle) {
  const WorldBounds& b = spec.bounds;
  const VehicleFootprint& fp = spec.vehicle.footprint;
  Layout out;
  out.obstacles.push_back({ObstacleClass::curb, make_rectangle(b.min_x, b.min_y, b.max_x, b.min_y + kCurbDepth)});

  const double s = std::sin(angle);
  const double c = std::cos(angle);
  // Lowest point of a box of length fp.length and width w rotated by angle.
  auto centre_y = [&](double w) { return b.min_y + kCurbDepth + 0.2 + fp.length / 2.0 * s + w / 2.0 * c; };
  const double slot = rng.uniform(spec.slot_size.lo, spec.slot_size.hi);
  const double slot_x = b.min_x + rng.uniform(0.3, 0.45) * b.width();

  for (int dir : {-1, 1}) {
    double offset = slot / 2.0;  // perpendicular distance from the slot axis to the free edge
    for (;;) {
      const double width = rng.uniform(1.8, 2.0);
      const double along = (offset + width / 2.0) / s;
      const double x = slot_x + dir * along;
      const ConvexPolygon car = make_oriented_box({x, centre_y(width)}, angle, rng.uniform(4.2, 4.8), width);
      if (!b.contains(car)) break;
      out.obstacles.push_back({ObstacleClass::vehicle, car});
      offset += width + rng.uniform(0.4, 0.9);
    }
  }

  out.slot_pose = pose_for_center({slot_x + jitter(rng, spec.position_jitter), centre_y(fp.width)},
                                  angle + jitter(rng, spec.heading_jitter), fp);
  // Leave the row in the direction the nose leans; a square row picks a side.
  int dir = c > 1e-9 ? 1 : (rng.uniform() < 0.5 ? -1 : 1);
  const double aisle_y = centre_y(fp.width) + fp.length / 2.0 + rng.uniform(3.0, 5.0);
  const double goal_x = slot_x + dir * rng.uniform(spec.goal_distance.lo, spec.goal_distance.hi);
  out.free_pose = pose_for_center({goal_x, aisle_y}, (dir > 0 ? 0.0 : kPi) + jitter(rng, spec.heading_jitter), fp);
  return out;
}

void add_pillars(const GenSpec& spec, Rng& rng, Layout& layout) {
  const auto lo = static_cast<long>(std::ceil(spec.pillar_count.lo));
  const auto hi = static_cast<long>(std::floor(spec.pillar_count.hi));
  if (hi < lo || hi <= 0) return;
  const long count = lo + static_cast<long>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
  const WorldBounds& b = spec.bounds;
  const VehicleFootprint& fp = spec.vehicle.footprint;
  const ConvexPolygon slot_body = footprint_polygon(fp, layout.slot_pose);
  const ConvexPolygon free_body = footprint_polygon(fp, layout.free_pose);
  for (long placed = 0, tries = 0; placed < count && tries < 50 * count; ++tries) {
    const double side = rng.uniform(0.5, 0.8);
    const Point2 center{rng.uniform(b.min_x + 1.0, b.max_x - 1.0), rng.uniform(b.min_y + 7.0, b.max_y - 1.0)};
    const ConvexPolygon pillar = make_oriented_box(center, 0.0, side, side);
    if (polygon_distance(pillar, slot_body) < 1.0 || polygon_distance(pillar, free_body) < 1.0) continue;
    bool clear = true;
    for (const Obstacle& o : layout.obstacles) {
      if (polygons_intersect(pillar, o.polygon)) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    layout.obstacles.push_back({ObstacleClass::pillar, pillar});
    ++placed;
  }
}

void check_spec(const GenSpec& spec) {
  if (!spec.vehicle.valid()) throw GenerationError("vehicle parameters are invalid");
  if (!(spec.bounds.width() > 0.0 && spec.bounds.height() > 0.0)) throw GenerationError("bounds are empty");
  for (const Range* r : {&spec.slot_size, &spec.pillar_count, &spec.goal_distance}) {
    if (!r->valid()) throw GenerationError("generation range has lo > hi");
  }
  const double needed =
      spec.kind == ScenarioKind::parallel ? spec.vehicle.footprint.length : spec.vehicle.footprint.width;
  if (spec.slot_size.lo <= needed) {
    throw GenerationError("slot size " + std::to_string(spec.slot_size.lo) + " m does not exceed the vehicle's " +
                          std::to_string(needed) + " m");
  }
  if (spec.pillar_count.lo < 0.0 || spec.position_jitter < 0.0 || spec.heading_jitter < 0.0 ||
      spec.goal_distance.lo < 0.0) {
    throw GenerationError("negative generation range");
  }
}

bool dubins_in_bounds(const Scenario& s) {
  const auto path = shortest_dubins(s.start.pose, s.goal, s.vehicle.turn_radius());
  if (!path) return false;
  for (const DubinsSample& sample : sample_dubins(*path, s.goal, 0.1)) {
    if (!s.bounds.contains(footprint_polygon(s.vehicle.footprint, sample.pose))) return false;
  }
  return true;
}

}  // namespace

namespace {

Scenario generate_one(const GenSpec& spec, std::size_t i) {
  Rng rng(mix_seed(spec.seed, i));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Layout layout;
    switch (spec.kind) {
      case ScenarioKind::parallel: layout = parallel_layout(spec, rng); break;
      case ScenarioKind::perpendicular: layout = angled_layout(spec, rng, kPi / 2.0); break;
      case ScenarioKind::diagonal: layout = angled_layout(spec, rng, rng.uniform(0.85, 1.15)); break;
    }
    add_pillars(spec, rng, layout);
    Scenario s;
    s.id = scenario_id(spec, i);
    s.kind = spec.kind;
    s.bounds = spec.bounds;
    s.vehicle = spec.vehicle;
    if (!spec.empty_lot) s.obstacles = std::move(layout.obstacles);
    if (spec.swap_direction) {
      // Drive the exit manoeuvre backwards: aisle to slot, both bodies turned around in place.
      s.start.pose = turned_around(layout.free_pose, spec.vehicle.footprint);
      s.goal = turned_around(layout.slot_pose, spec.vehicle.footprint);
    } else {
      s.start.pose = layout.slot_pose;
      s.goal = layout.free_pose;
    }
    if (validate(s).empty()) return s;
  }
  throw GenerationError("no valid " + std::string(to_string(spec.kind)) + " scenario after " +
                        std::to_string(kMaxAttempts) + " attempts (index " + std::to_string(i) + ")");
}

}  // namespace

std::vector<Scenario> generate(const GenSpec& spec) {
  check_spec(spec);
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < spec.count; ++i) out.push_back(generate_one(spec, i));

  // The first ten indices of a spec are probed even when fewer are requested,
  // so the outcome does not depend on the count.
  bool connected = false;
  for (std::size_t i = 0; i < 10 && !connected && spec.count > 0; ++i) {
    connected = dubins_in_bounds(i < out.size() ? out[i] : generate_one(spec, i));
  }
  if (spec.count > 0 && !connected) {
    throw GenerationError("none of the first 10 scenarios has an in-bounds Dubins connection; the suite is degenerate");
  }
  return out;
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> v;
  auto add = [&](const char* name) {
    if (std::find(v.begin(), v.end(), name) == v.end()) v.emplace_back(name);
  };
  if (!s.vehicle.valid()) add("vehicle-invalid");
  if (!(s.bounds.width() > 0.0 && s.bounds.height() > 0.0)) add("bounds-empty");
  std::vector<ConvexPolygon> solid;
  for (const Obstacle& o : s.obstacles) {
    if (!o.polygon.valid()) {
      add("obstacle-not-convex");
      continue;
    }
    if (!s.bounds.contains(o.polygon)) add("obstacle-out-of-bounds");
    solid.push_back(o.polygon);
  }
  if (!v.empty() && (v.front() == "vehicle-invalid" || v.front() == "bounds-empty")) return v;
  auto check_pose = [&](const Pose& pose, const char* out_name, const char* hit_name) {
    if (!std::isfinite(pose.position.x) || !std::isfinite(pose.position.y) || !std::isfinite(pose.heading)) {
      add(out_name);
      return;
    }
    const ConvexPolygon body = footprint_polygon(s.vehicle.footprint, pose);
    if (!s.bounds.contains(body)) add(out_name);
    for (const ConvexPolygon& o : solid) {
      if (polygons_intersect(body, o)) {
        add(hit_name);
        break;
      }
    }
  };
  check_pose(s.start.pose, "start-out-of-bounds", "start-in-collision");
  check_pose(s.goal, "goal-out-of-bounds", "goal-in-collision");
  if (!(std::fabs(s.start.steer) <= s.vehicle.max_steer)) add("start-steer-out-of-range");
  return v;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

using detail::Fields;
using detail::Json;

Json point_json(Point2 p) { return Json::array({p.x, p.y}); }

Json polygon_json(const ConvexPolygon& poly) {
  Json arr = Json::array();
  for (const Point2& p : poly.vertices()) arr.push_back(point_json(p));
  return arr;
}

ConvexPolygon polygon_from(const Json& arr, const std::string& path) {
  if (!arr.is_array()) throw FormatError("field '" + path + "': expected an array of [x, y] pairs");
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    if (!arr[i].is_array() || arr[i].size() != 2) throw FormatError("field '" + at + "': expected [x, y]");
    pts.push_back({detail::element_number(arr[i][0], at), detail::element_number(arr[i][1], at)});
  }
  return ConvexPolygon(std::move(pts));
}

}  // namespace

std::string scenario_to_text(const Scenario& s) {
  Json j;
  j["id"] = s.id;
  j["kind"] = to_string(s.kind);
  j["bounds"] = {{"min_x", s.bounds.min_x}, {"min_y", s.bounds.min_y}, {"max_x", s.bounds.max_x},
                 {"max_y", s.bounds.max_y}};
  j["vehicle"] = {{"wheelbase", s.vehicle.wheelbase},
                  {"max_steer", s.vehicle.max_steer},
                  {"length", s.vehicle.footprint.length},
                  {"width", s.vehicle.footprint.width},
                  {"rear_overhang", s.vehicle.footprint.rear_overhang}};
  j["start"] = {{"x", s.start.pose.position.x}, {"y", s.start.pose.position.y}, {"heading", s.start.pose.heading},
                {"gear", to_string(s.start.gear)},  {"steer", s.start.steer}};
  j["goal"] = {{"x", s.goal.position.x}, {"y", s.goal.position.y}, {"heading", s.goal.heading}};
  Json obstacles = Json::array();
  for (const Obstacle& o : s.obstacles) {
    obstacles.push_back({{"class", to_string(o.cls)}, {"polygon", polygon_json(o.polygon)}});
  }
  j["obstacles"] = std::move(obstacles);
  return j.dump(2) + "\n";
}

Scenario scenario_from_text(const std::string& text, const std::string& source) {
  const Json j = detail::parse_json(text, source);
  try {
    Fields root(j, "");
    Scenario s;
    s.id = root.string("id");
    s.kind = root.convert("kind", scenario_kind_from_string);

    Fields b = root.object("bounds");
    s.bounds = {b.number("min_x"), b.number("min_y"), b.number("max_x"), b.number("max_y")};
    b.finish();

    Fields v = root.object("vehicle");
    s.vehicle.wheelbase = v.number("wheelbase");
    s.vehicle.max_steer = v.number("max_steer");
    s.vehicle.footprint.length = v.number("length");
    s.vehicle.footprint.width = v.number("width");
    s.vehicle.footprint.rear_overhang = v.number("rear_overhang");
    v.finish();

    Fields st = root.object("start");
    s.start.pose = Pose::make(st.number("x"), st.number("y"), st.number("heading"));
    s.start.gear = st.convert("gear", gear_from_string);
    s.start.steer = st.number("steer");
    st.finish();

    Fields g = root.object("goal");
    s.goal = Pose::make(g.number("x"), g.number("y"), g.number("heading"));
    g.finish();

    const Json& obstacles = root.array("obstacles");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      Fields o(obstacles[i], "obstacles[" + std::to_string(i) + "]");
      Obstacle ob;
      ob.cls = o.convert("class", obstacle_class_from_string);
      ob.polygon = polygon_from(o.get("polygon"), o.path("polygon"));
      o.finish();
      s.obstacles.push_back(std::move(ob));
    }
    root.finish();
    return s;
  } catch (const FormatError& e) {
    throw FormatError(source + ": " + e.what());
  }
}

void write_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << scenario_to_text(scenario);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Scenario read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return scenario_from_text(text.str(), path.string());
}

std::vector<std::filesystem::path> list_scenario_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".scn") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace pkmc
