#include <algorithm>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "pkmc/bench.hpp"
#include "support.hpp"

using namespace pkmc;

namespace {

std::size_t count_of(const std::string& text, const std::string& what) {
  std::size_t n = 0;
  for (std::size_t at = text.find(what); at != std::string::npos; at = text.find(what, at + 1)) ++n;
  return n;
}

template <class Fn>
std::string format_error_of(Fn&& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("run configuration") {
  const RunConfig defaults;

  SUBCASE("empty document gives the defaults") {
    const RunConfig c = run_config_from_text("{}");
    CHECK(run_config_to_text(c) == run_config_to_text(defaults));
  }
  SUBCASE("round trip") {
    RunConfig c;
    c.seed = 99;
    c.record_wall_time = false;
    c.actions.steer_count = 5;
    c.search.c_puct = 2.5;
    c.hastar.cell = 0.2;
    c.train.tau = 0.5;
    c.train.min_visits = 4;
    c.generation.slot_size = Range{5.0, 5.5};
    c.generation.swap_direction = true;
    const std::string text = run_config_to_text(c);
    const RunConfig back = run_config_from_text(text);
    CHECK(run_config_to_text(back) == text);
    CHECK(back.seed == 99);
    CHECK(back.search == c.search);
    CHECK(back.hastar == c.hastar);
    CHECK(back.generation == c.generation);
  }
  SUBCASE("partial sections keep the other defaults") {
    const RunConfig c = run_config_from_text(R"({"search": {"node_limit": 777}})");
    CHECK(c.search.node_limit == 777);
    CHECK(c.search.c_puct == defaults.search.c_puct);
  }
  SUBCASE("strictness") {
    CHECK(format_error_of([] { run_config_from_text(R"({"sead": 1})"); }).find("sead") != std::string::npos);
    CHECK(format_error_of([] { run_config_from_text(R"({"search": {"cpuct": 1}})"); }).find("cpuct") !=
          std::string::npos);
    CHECK(format_error_of([] { run_config_from_text(R"({"search": {"node_limit": "many"}})"); })
              .find("search.node_limit") != std::string::npos);
    CHECK_FALSE(format_error_of([] { run_config_from_text(R"({"seed": -1})"); }).empty());
    CHECK_FALSE(format_error_of([] { run_config_from_text(R"({"weights": {"w_dist": -1}})"); }).empty());
    CHECK_FALSE(format_error_of([] { run_config_from_text("{\"seed\": 1,,}", "bad.json"); }).empty());
  }
  SUBCASE("derived settings") {
    RunConfig c;
    c.actions.steer_count = 3;
    c.search.node_limit = 1234;
    const VehicleParams car;
    const SearchConfig s = c.search_config(car);
    CHECK(s.actions.size() == 6);
    CHECK(s.node_limit == 1234);
    CHECK(c.astar_config(car).actions.size() == 6);
    CHECK(c.network_shape(car).action_count == 6);
    const GenSpec g = c.gen_spec(ScenarioKind::perpendicular, 4, 17);
    CHECK(g.count == 4);
    CHECK(g.seed == 17);
    CHECK(g.slot_size == GenSpec::default_slot_size(ScenarioKind::perpendicular, g.vehicle));
  }
}

TEST_CASE("path files") {
  const Scenario s = test::empty_lot(Pose::make(9, 12, 0.4));
  SearchConfig sc;
  sc.actions = make_action_set(s.vehicle, 7, 0.8);
  sc.path_target = 3;
  const UniformEvaluator u(sc.actions.size());
  const SearchResult r = run_search(s, u, sc);
  REQUIRE(r.best_path);
  const PathStats stats{r.nodes_created, 0.0, to_string(r.termination)};
  const PathFile p = make_path_file(s, "mcts", &r.best_path->states, r.best_path->tree_states, sc.weights, stats);
  CHECK(p.found());
  CHECK(p.closing_from + 1 == r.best_path->tree_states);

  SUBCASE("round trip and replay") {
    const PathFile back = path_file_from_text(path_file_to_text(p));
    CHECK(back == p);
    CHECK(check_path_file(back, s, sc.actions, sc.weights).empty());

    const std::filesystem::path file = std::filesystem::temp_directory_path() / "pkmc_test_path.json";
    write_path_file(p, file);
    CHECK(read_path_file(file) == p);
    std::filesystem::remove(file);
  }
  SUBCASE("tampering is caught") {
    PathFile moved = p;
    moved.poses[1].pose.position.x += 0.05;
    CHECK_FALSE(check_path_file(moved, s, sc.actions, sc.weights).empty());

    PathFile cheap = p;
    cheap.cost.efficiency += 0.01;
    CHECK_FALSE(check_path_file(cheap, s, sc.actions, sc.weights).empty());

    Scenario blocked = s;
    const Point2 mid = p.poses[p.poses.size() / 2].pose.position;
    test::add_box(blocked, ObstacleClass::pillar, mid.x - 0.2, mid.y - 0.2, mid.x + 0.2, mid.y + 0.2);
    CHECK_FALSE(check_path_file(p, blocked, sc.actions, sc.weights).empty());
  }
  SUBCASE("Hybrid A* paths replay too") {
    AStarConfig ac;
    ac.actions = sc.actions;
    Scenario turn = s;
    turn.goal = Pose::make(6, 14, kPi / 2);
    turn.bounds = {0, 0, 12, 20};
    const AStarResult a = hybrid_astar(turn, ac);
    REQUIRE(a.path);
    const PathFile h = make_path_file(turn, "hastar", &*a.path, a.tree_states, ac.weights,
                                      {a.nodes_created, 0.0, to_string(a.termination)});
    CHECK(check_path_file(h, turn, ac.actions, ac.weights).empty());
  }
  SUBCASE("no path") {
    const PathFile none = make_path_file(s, "hastar", nullptr, 0, sc.weights, {5, 0.0, "node_limit"});
    CHECK_FALSE(none.found());
    CHECK(path_file_from_text(path_file_to_text(none)) == none);
  }
  SUBCASE("malformed files") {
    CHECK_FALSE(format_error_of([&] {
                  std::string text = path_file_to_text(p);
                  const std::size_t at = text.find("\"mcts\"");
                  text.replace(at, 6, "\"rrt\"");
                  path_file_from_text(text);
                }).empty());
  }
}

TEST_CASE("svg rendering") {
  Scenario s = test::empty_lot();
  test::add_box(s, ObstacleClass::vehicle, 10, 2, 14, 4);
  test::add_box(s, ObstacleClass::curb, 0, 0, 20, 0.3);
  test::add_box(s, ObstacleClass::pillar, 15, 15, 15.5, 15.5);
  const std::vector<MotionState> path{s.start, test::state_at(3.8, 10, 0)};
  const std::vector<MotionState> visited{s.start};
  const std::string svg = render_svg(s, {&path, &visited});
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count_of(svg, "<svg") == count_of(svg, "</svg>"));
  CHECK(count_of(svg, "<") == count_of(svg, ">"));
  CHECK(count_of(svg, "<polygon") >= 3);
  CHECK(svg.find("#d62728") != std::string::npos);
  CHECK(svg.find("#9467bd") != std::string::npos);
  CHECK(render_svg(s, {}).size() < svg.size());
}

TEST_CASE("discretization sweep") {
  GenSpec g = GenSpec::defaults(ScenarioKind::diagonal);
  g.empty_lot = true;
  g.count = 2;
  g.seed = 6;
  const std::vector<Scenario> scenarios = generate(g);
  RunConfig c;
  c.actions.steer_count = 3;
  c.search.node_limit = 600;
  c.hastar.node_limit = 3000;
  c.network = NetworkSizes{16, {4, 4, 4}, 16, 8};
  Rng rng(2);
  const NetworkParams model = NetworkParams::random(c.network_shape(scenarios[0].vehicle), rng);
  const std::vector<double> discs{0.1, 0.2};
  const std::vector<SweepRow> rows = run_sweep(scenarios, discs, c, model);
  REQUIRE(rows.size() == 4);
  for (const SweepRow& r : rows) {
    CHECK((r.planner == "mcts" || r.planner == "hastar"));
    CHECK(r.success_rate >= 0.0);
    CHECK(r.success_rate <= 1.0);
    CHECK(r.median_ms.has_value() == (r.success_rate > 0.0));
    const std::string line = sweep_row(r);
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows[0].disc == 0.1);
  CHECK(rows[3].disc == 0.2);
  CHECK(std::string(kSweepHeader) == "disc,planner,median_ms,success_rate,median_cost");

  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(run_sweep(scenarios, bad, c, model), std::invalid_argument);
  CHECK_THROWS_AS(run_sweep(std::span<const Scenario>{}, discs, c, model), std::invalid_argument);
}
