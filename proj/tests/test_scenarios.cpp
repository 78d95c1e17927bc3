#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "pkmc/motion.hpp"
#include "pkmc/scenarios.hpp"
#include "support.hpp"

using namespace pkmc;

namespace {

bool has(const std::vector<std::string>& v, const std::string& name) {
  return std::find(v.begin(), v.end(), name) != v.end();
}

std::string without_line(const std::string& text, const std::string& needle) {
  const std::size_t at = text.find(needle);
  REQUIRE(at != std::string::npos);
  const std::size_t begin = text.rfind('\n', at) + 1;
  const std::size_t end = text.find('\n', at);
  return text.substr(0, begin) + text.substr(end + 1);
}

// Free length between the parked cars either side of the start footprint.
std::optional<double> parallel_gap(const Scenario& s) {
  const ConvexPolygon body = footprint_polygon(s.vehicle.footprint, s.start.pose);
  const double mid = (body.min_x() + body.max_x()) / 2.0;
  double left = -INFINITY, right = INFINITY;
  for (const Obstacle& o : s.obstacles) {
    if (o.cls != ObstacleClass::vehicle) continue;
    if (o.polygon.max_x() <= mid) left = std::max(left, o.polygon.max_x());
    if (o.polygon.min_x() >= mid) right = std::min(right, o.polygon.min_x());
  }
  if (!std::isfinite(left) || !std::isfinite(right)) return std::nullopt;
  return right - left;
}

}  // namespace

TEST_CASE("generation is seed deterministic") {
  for (ScenarioKind kind : {ScenarioKind::parallel, ScenarioKind::perpendicular, ScenarioKind::diagonal}) {
    GenSpec g = GenSpec::defaults(kind);
    g.count = 5;
    g.seed = 7;
    const std::vector<Scenario> a = generate(g);
    const std::vector<Scenario> b = generate(g);
    REQUIRE(a.size() == 5);
    CHECK(a == b);
    for (const Scenario& s : a) CHECK(validate(s).empty());

    // A scenario does not depend on how many were requested.
    g.count = 2;
    const std::vector<Scenario> fewer = generate(g);
    CHECK(fewer[1] == a[1]);

    g.count = 5;
    g.seed = 8;
    CHECK(generate(g) != a);
  }
}

TEST_CASE("parallel slot length follows the range") {
  GenSpec g = GenSpec::defaults(ScenarioKind::parallel);
  const double length = g.vehicle.footprint.length;
  g.slot_size = {length + 0.8, length + 1.2};
  g.count = 30;
  g.seed = 3;
  g.position_jitter = 0.0;
  int measured = 0;
  for (const Scenario& s : generate(g)) {
    const auto gap = parallel_gap(s);
    if (!gap) continue;
    ++measured;
    CHECK(*gap >= length + 0.8 - 1e-9);
    CHECK(*gap <= length + 1.2 + 1e-9);
  }
  CHECK(measured >= 20);
}

TEST_CASE("generation errors") {
  GenSpec g = GenSpec::defaults(ScenarioKind::parallel);
  g.slot_size = {3.5, 3.9};
  CHECK_THROWS_AS(generate(g), GenerationError);

  GenSpec p = GenSpec::defaults(ScenarioKind::perpendicular);
  p.slot_size = {1.5, 2.5};
  CHECK_THROWS_AS(generate(p), GenerationError);

  GenSpec r = GenSpec::defaults(ScenarioKind::diagonal);
  r.goal_distance = {5.0, 4.0};
  CHECK_THROWS_AS(generate(r), GenerationError);

  // Feasible ranges in a lot too small for any layout.
  GenSpec tiny = GenSpec::defaults(ScenarioKind::parallel);
  tiny.bounds = {0, 0, 6, 6};
  CHECK_THROWS_AS(generate(tiny), GenerationError);
}

TEST_CASE("generated suites have a free direct connection early on") {
  for (ScenarioKind kind : {ScenarioKind::parallel, ScenarioKind::perpendicular, ScenarioKind::diagonal}) {
    GenSpec g = GenSpec::defaults(kind);
    g.count = 10;
    g.seed = 0;
    int in_bounds = 0;
    for (const Scenario& s : generate(g)) {
      Scenario empty = s;
      empty.obstacles.clear();
      if (dubins_connects(s.start.pose, s.goal, s.vehicle, empty)) ++in_bounds;
    }
    CHECK(in_bounds >= 1);
  }
}

TEST_CASE("swapped direction and empty lots") {
  GenSpec g = GenSpec::defaults(ScenarioKind::perpendicular);
  g.count = 3;
  g.seed = 5;
  const std::vector<Scenario> out = generate(g);
  g.swap_direction = true;
  const std::vector<Scenario> in = generate(g);
  g.swap_direction = false;
  g.empty_lot = true;
  const std::vector<Scenario> empty = generate(g);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(validate(in[i]).empty());
    CHECK(in[i].obstacles == out[i].obstacles);
    // Same bodies, turned around.
    const ConvexPolygon a = footprint_polygon(out[i].vehicle.footprint, out[i].start.pose);
    const ConvexPolygon b = footprint_polygon(in[i].vehicle.footprint, in[i].goal);
    CHECK(a.center().x == doctest::Approx(b.center().x));
    CHECK(a.center().y == doctest::Approx(b.center().y));
    CHECK(std::fabs(normalize_angle(out[i].start.pose.heading - in[i].goal.heading)) == doctest::Approx(kPi));
    CHECK(empty[i].obstacles.empty());
    CHECK(empty[i].start == out[i].start);
    CHECK(empty[i].id.rfind("empty-", 0) == 0);
  }
}

TEST_CASE("validate") {
  const Scenario ok = test::empty_lot();
  CHECK(validate(ok).empty());

  Scenario start_hit = ok;
  test::add_box(start_hit, ObstacleClass::pillar, 2.5, 9.5, 3.5, 10.5);
  CHECK(validate(start_hit) == std::vector<std::string>{"start-in-collision"});

  Scenario concave = ok;
  concave.obstacles.push_back(
      {ObstacleClass::curb, ConvexPolygon({{14, 14}, {17, 14}, {15, 15}, {17, 17}, {14, 17}})});
  CHECK(validate(concave) == std::vector<std::string>{"obstacle-not-convex"});

  Scenario outside = ok;
  outside.goal = Pose::make(19.5, 10, 0);
  CHECK(has(validate(outside), "goal-out-of-bounds"));

  Scenario steer = ok;
  steer.start.steer = 0.9;
  CHECK(has(validate(steer), "start-steer-out-of-range"));
}

TEST_CASE("scenario files") {
  GenSpec g = GenSpec::defaults(ScenarioKind::diagonal);
  g.count = 2;
  g.seed = 12;
  const std::vector<Scenario> scenarios = generate(g);
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "pkmc_test_scenarios";
  std::filesystem::remove_all(dir);

  SUBCASE("round trip") {
    for (const Scenario& s : scenarios) {
      const std::filesystem::path file = dir / "diagonal" / (s.id + ".scn");
      std::filesystem::create_directories(file.parent_path());
      write_scenario(s, file);
      const Scenario back = read_scenario(file);
      CHECK(back == s);
    }
    const auto files = list_scenario_files(dir);
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == scenarios[0].id + ".scn");
  }
  SUBCASE("missing field is named") {
    const std::string text = without_line(scenario_to_text(scenarios[0]), "\"wheelbase\"");
    try {
      scenario_from_text(text, "cut.scn");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("vehicle.wheelbase") != std::string::npos);
    }
  }
  SUBCASE("unknown field is rejected") {
    std::string text = scenario_to_text(scenarios[0]);
    text.insert(text.find('{') + 1, "\n  \"colour\": \"red\",");
    try {
      scenario_from_text(text, "extra.scn");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("colour") != std::string::npos);
    }
  }
  SUBCASE("syntax errors carry a position") {
    try {
      scenario_from_text("{\n  \"id\": \"x\",\n  oops\n}", "broken.scn");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  std::filesystem::remove_all(dir);
}
