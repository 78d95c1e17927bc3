#include "pkmc/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_fields.hpp"
#include "pkmc/motion.hpp"

namespace pkmc {

using detail::Fields;
using detail::Json;

namespace {

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(std::string("cannot open ") + what + " " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Json range_json(const Range& r) { return Json::array({r.lo, r.hi}); }

Range range_from(Fields& f, const std::string& key) {
  const Json& a = f.array(key);
  if (a.size() != 2) throw FormatError("field '" + f.path(key) + "': expected [lo, hi]");
  Range r{detail::element_number(a[0], f.path(key)), detail::element_number(a[1], f.path(key))};
  if (!r.valid()) throw FormatError("field '" + f.path(key) + "': lo > hi");
  return r;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Run configuration

SearchConfig RunConfig::search_config(const VehicleParams& vehicle) const {
  SearchConfig c;
  c.c_puct = search.c_puct;
  c.node_limit = search.node_limit;
  c.time_limit_ms = search.time_limit_ms;
  c.path_target = search.path_target;
  c.max_depth = search.max_depth;
  c.actions = make_action_set(vehicle, actions.steer_count, actions.step);
  c.weights = weights;
  return c;
}

AStarConfig RunConfig::astar_config(const VehicleParams& vehicle) const {
  AStarConfig c;
  c.actions = make_action_set(vehicle, actions.steer_count, actions.step);
  c.weights = weights;
  c.cell = hastar.cell;
  c.heading_bin = hastar.heading_bin;
  c.heuristic_weight = hastar.heuristic_weight;
  c.node_limit = hastar.node_limit;
  c.time_limit_ms = hastar.time_limit_ms;
  return c;
}

NetworkShape RunConfig::network_shape(const VehicleParams& vehicle) const {
  NetworkShape s = NetworkShape::for_actions(make_action_set(vehicle, actions.steer_count, actions.step), network.grid);
  s.conv_channels = network.conv_channels;
  s.feature = network.feature;
  s.head_hidden = network.head_hidden;
  return s;
}

GenSpec RunConfig::gen_spec(ScenarioKind kind, std::size_t count, std::uint64_t gen_seed) const {
  GenSpec spec = GenSpec::defaults(kind);
  spec.count = count;
  spec.seed = gen_seed;
  spec.bounds = generation.bounds;
  if (generation.slot_size) spec.slot_size = *generation.slot_size;
  spec.pillar_count = generation.pillar_count;
  spec.goal_distance = generation.goal_distance;
  spec.position_jitter = generation.position_jitter;
  spec.heading_jitter = generation.heading_jitter;
  spec.swap_direction = generation.swap_direction;
  spec.empty_lot = generation.empty_lot;
  return spec;
}

RunConfig run_config_from_text(const std::string& text, const std::string& source) {
  const Json j = detail::parse_json(text, source);
  RunConfig c;
  try {
    Fields root(j, "");
    if (root.has("seed")) {
      const long long seed = root.integer("seed");
      if (seed < 0) throw FormatError("field 'seed': expected a nonnegative integer");
      c.seed = static_cast<std::uint64_t>(seed);
    }
    c.record_wall_time = root.boolean("record_wall_time", c.record_wall_time);
    if (root.has("actions")) {
      Fields f = root.object("actions");
      c.actions.steer_count = static_cast<int>(f.integer("steer_count", c.actions.steer_count));
      c.actions.step = f.number("step", c.actions.step);
      f.finish();
    }
    if (root.has("weights")) {
      Fields f = root.object("weights");
      CostWeights& w = c.weights;
      w.safety_threshold = f.number("safety_threshold", w.safety_threshold);
      w.w_safety = f.number("w_safety", w.w_safety);
      w.w_gear = f.number("w_gear", w.w_gear);
      w.w_steer = f.number("w_steer", w.w_steer);
      w.w_dist = f.number("w_dist", w.w_dist);
      w.alpha0 = f.number("alpha0", w.alpha0);
      w.alpha1 = f.number("alpha1", w.alpha1);
      f.finish();
      if (!w.valid()) throw FormatError("field 'weights': invalid cost weights");
    }
    if (root.has("search")) {
      Fields f = root.object("search");
      SearchLimits& s = c.search;
      s.c_puct = f.number("c_puct", s.c_puct);
      s.node_limit = f.count("node_limit", s.node_limit);
      s.time_limit_ms = f.number("time_limit_ms", s.time_limit_ms);
      s.path_target = f.count("path_target", s.path_target);
      s.max_depth = static_cast<int>(f.integer("max_depth", s.max_depth));
      f.finish();
    }
    if (root.has("hastar")) {
      Fields f = root.object("hastar");
      AStarLimits& h = c.hastar;
      h.cell = f.number("cell", h.cell);
      h.heading_bin = f.number("heading_bin", h.heading_bin);
      h.heuristic_weight = f.number("heuristic_weight", h.heuristic_weight);
      h.node_limit = f.count("node_limit", h.node_limit);
      h.time_limit_ms = f.number("time_limit_ms", h.time_limit_ms);
      f.finish();
    }
    if (root.has("network")) {
      Fields f = root.object("network");
      NetworkSizes& n = c.network;
      n.grid = static_cast<int>(f.integer("grid", n.grid));
      if (f.has("conv_channels")) {
        const Json& a = f.array("conv_channels");
        if (a.size() != 3) throw FormatError("field 'network.conv_channels': expected 3 integers");
        for (std::size_t i = 0; i < 3; ++i) {
          if (!a[i].is_number_integer()) throw FormatError("field 'network.conv_channels': expected integers");
          n.conv_channels[i] = a[i].get<int>();
        }
      }
      n.feature = static_cast<int>(f.integer("feature", n.feature));
      n.head_hidden = static_cast<int>(f.integer("head_hidden", n.head_hidden));
      f.finish();
    }
    if (root.has("train")) {
      Fields f = root.object("train");
      TrainConfig& t = c.train;
      t.iterations = f.count("iterations", t.iterations);
      t.scenarios_per_iter = f.count("scenarios_per_iter", t.scenarios_per_iter);
      t.epochs = f.count("epochs", t.epochs);
      t.batch_size = f.count("batch_size", t.batch_size);
      t.learning_rate = f.number("learning_rate", t.learning_rate);
      t.momentum = f.number("momentum", t.momentum);
      t.tau = f.number("tau", t.tau);
      t.per_tree = f.count("per_tree", t.per_tree);
      t.min_visits = static_cast<std::uint32_t>(f.count("min_visits", t.min_visits));
      t.replay_capacity = f.count("replay_capacity", t.replay_capacity);
      f.finish();
      if (!t.valid()) throw FormatError("field 'train': invalid training configuration");
    }
    if (root.has("generation")) {
      Fields f = root.object("generation");
      GenerationConfig& g = c.generation;
      if (f.has("slot_size")) g.slot_size = range_from(f, "slot_size");
      if (f.has("pillar_count")) g.pillar_count = range_from(f, "pillar_count");
      if (f.has("goal_distance")) g.goal_distance = range_from(f, "goal_distance");
      g.position_jitter = f.number("position_jitter", g.position_jitter);
      g.heading_jitter = f.number("heading_jitter", g.heading_jitter);
      g.swap_direction = f.boolean("swap_direction", g.swap_direction);
      g.empty_lot = f.boolean("empty_lot", g.empty_lot);
      if (f.has("bounds")) {
        Fields b = f.object("bounds");
        g.bounds = {b.number("min_x"), b.number("min_y"), b.number("max_x"), b.number("max_y")};
        b.finish();
      }
      f.finish();
    }
    root.finish();
  } catch (const FormatError& e) {
    throw FormatError(source + ": " + e.what());
  }
  return c;
}

std::string run_config_to_text(const RunConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["record_wall_time"] = c.record_wall_time;
  j["actions"] = {{"steer_count", c.actions.steer_count}, {"step", c.actions.step}};
  j["weights"] = {{"safety_threshold", c.weights.safety_threshold}, {"w_safety", c.weights.w_safety},
                  {"w_gear", c.weights.w_gear},   {"w_steer", c.weights.w_steer},
                  {"w_dist", c.weights.w_dist},   {"alpha0", c.weights.alpha0},
                  {"alpha1", c.weights.alpha1}};
  j["search"] = {{"c_puct", c.search.c_puct},
                 {"node_limit", c.search.node_limit},
                 {"time_limit_ms", c.search.time_limit_ms},
                 {"path_target", c.search.path_target},
                 {"max_depth", c.search.max_depth}};
  j["hastar"] = {{"cell", c.hastar.cell},
                 {"heading_bin", c.hastar.heading_bin},
                 {"heuristic_weight", c.hastar.heuristic_weight},
                 {"node_limit", c.hastar.node_limit},
                 {"time_limit_ms", c.hastar.time_limit_ms}};
  j["network"] = {{"grid", c.network.grid},
                  {"conv_channels", c.network.conv_channels},
                  {"feature", c.network.feature},
                  {"head_hidden", c.network.head_hidden}};
  j["train"] = {{"iterations", c.train.iterations},     {"scenarios_per_iter", c.train.scenarios_per_iter},
                {"epochs", c.train.epochs},             {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate}, {"momentum", c.train.momentum},
                {"tau", c.train.tau},                   {"per_tree", c.train.per_tree},
                {"min_visits", c.train.min_visits},
                {"replay_capacity", c.train.replay_capacity}};
  Json g;
  if (c.generation.slot_size) g["slot_size"] = range_json(*c.generation.slot_size);
  g["pillar_count"] = range_json(c.generation.pillar_count);
  g["goal_distance"] = range_json(c.generation.goal_distance);
  g["position_jitter"] = c.generation.position_jitter;
  g["heading_jitter"] = c.generation.heading_jitter;
  g["swap_direction"] = c.generation.swap_direction;
  g["empty_lot"] = c.generation.empty_lot;
  g["bounds"] = {{"min_x", c.generation.bounds.min_x}, {"min_y", c.generation.bounds.min_y},
                 {"max_x", c.generation.bounds.max_x}, {"max_y", c.generation.bounds.max_y}};
  j["generation"] = std::move(g);
  return j.dump(2) + "\n";
}

RunConfig read_run_config(const std::filesystem::path& path) {
  return run_config_from_text(read_text(path, "config"), path.string());
}

// ---------------------------------------------------------------------------
// Path files

std::vector<MotionState> PathFile::states(double start_steer) const {
  std::vector<MotionState> out;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    out.push_back(MotionState{poses[i].pose, poses[i].gear, i == 0 ? start_steer : steer[i - 1]});
  }
  return out;
}

PathFile make_path_file(const Scenario& scenario, const std::string& planner, const std::vector<MotionState>* states,
                        std::size_t tree_states, const CostWeights& weights, const PathStats& stats) {
  PathFile f;
  f.scenario = scenario.id;
  f.planner = planner;
  f.stats = stats;
  if (states != nullptr && !states->empty()) {
    for (std::size_t i = 0; i < states->size(); ++i) {
      f.poses.push_back({(*states)[i].pose, (*states)[i].gear});
      if (i > 0) f.steer.push_back((*states)[i].steer);
    }
    f.closing_from = tree_states == 0 ? 0 : tree_states - 1;
    f.cost = path_cost(*states, scenario, weights);
  }
  return f;
}

std::string path_file_to_text(const PathFile& p) {
  Json j;
  j["scenario"] = p.scenario;
  j["planner"] = p.planner;
  Json poses = Json::array();
  for (const PathPose& q : p.poses) {
    poses.push_back(Json::array({q.pose.position.x, q.pose.position.y, q.pose.heading, to_string(q.gear)}));
  }
  j["poses"] = std::move(poses);
  j["steer"] = p.steer;
  j["closing_from"] = p.closing_from;
  j["cost"] = {{"safety", p.cost.safety},
               {"comfort", p.cost.comfort},
               {"efficiency", p.cost.efficiency},
               {"total", p.cost.total}};
  j["stats"] = {{"nodes", p.stats.nodes}, {"ms", p.stats.ms}, {"termination", p.stats.termination}};
  return j.dump(2) + "\n";
}

PathFile path_file_from_text(const std::string& text, const std::string& source) {
  const Json j = detail::parse_json(text, source);
  PathFile p;
  try {
    Fields root(j, "");
    p.scenario = root.string("scenario");
    p.planner = root.string("planner");
    if (p.planner != "mcts" && p.planner != "hastar") {
      throw FormatError("field 'planner': expected \"mcts\" or \"hastar\"");
    }
    const Json& poses = root.array("poses");
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const std::string at = "poses[" + std::to_string(i) + "]";
      const Json& q = poses[i];
      if (!q.is_array() || q.size() != 4 || !q[3].is_string()) {
        throw FormatError("field '" + at + "': expected [x, y, heading, gear]");
      }
      PathPose pp;
      pp.pose = Pose::make(detail::element_number(q[0], at), detail::element_number(q[1], at),
                           detail::element_number(q[2], at));
      try {
        pp.gear = gear_from_string(q[3].get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw FormatError("field '" + at + "': " + e.what());
      }
      p.poses.push_back(pp);
    }
    const Json& steer = root.array("steer");
    for (std::size_t i = 0; i < steer.size(); ++i) {
      p.steer.push_back(detail::element_number(steer[i], "steer[" + std::to_string(i) + "]"));
    }
    if (!p.poses.empty() && p.steer.size() + 1 != p.poses.size()) {
      throw FormatError("field 'steer': expected one entry per segment");
    }
    p.closing_from = root.count("closing_from");
    if (!p.poses.empty() && p.closing_from >= p.poses.size()) {
      throw FormatError("field 'closing_from': index past the last pose");
    }
    Fields cost = root.object("cost");
    p.cost.safety = cost.number("safety");
    p.cost.comfort = cost.number("comfort");
    p.cost.efficiency = cost.number("efficiency");
    p.cost.total = cost.number("total");
    cost.finish();
    Fields stats = root.object("stats");
    p.stats.nodes = stats.count("nodes");
    p.stats.ms = stats.number("ms");
    p.stats.termination = stats.string("termination");
    stats.finish();
    root.finish();
  } catch (const FormatError& e) {
    throw FormatError(source + ": " + e.what());
  }
  return p;
}

void write_path_file(const PathFile& path, const std::filesystem::path& file) {
  write_text(file, path_file_to_text(path));
}

PathFile read_path_file(const std::filesystem::path& file) {
  return path_file_from_text(read_text(file, "path file"), file.string());
}

namespace {

bool near_pose(const Pose& a, const Pose& b, double tol) {
  return distance(a.position, b.position) <= tol && std::fabs(normalize_angle(a.heading - b.heading)) <= tol;
}

}  // namespace

std::vector<std::string> check_path_file(const PathFile& p, const Scenario& scenario, const ActionSet& actions,
                                         const CostWeights& weights) {
  std::vector<std::string> problems;
  if (!p.found()) return problems;
  if (p.steer.size() + 1 != p.poses.size() || p.closing_from >= p.poses.size()) {
    problems.push_back("malformed: steer or closing_from inconsistent with the pose list");
    return problems;
  }
  const std::vector<MotionState> states = p.states(scenario.start.steer);
  const VehicleParams& params = scenario.vehicle;
  const CollisionChecker checker(scenario);
  constexpr double kTol = 1e-6;

  if (!near_pose(states.front().pose, scenario.start.pose, 1e-9)) problems.push_back("first pose is not the start");
  if (!near_pose(states.back().pose, scenario.goal, kTol)) problems.push_back("last pose is not the destination");

  for (std::size_t i = 0; i < p.closing_from; ++i) {
    const MotionState& from = states[i];
    const MotionState& to = states[i + 1];
    bool matched = false;
    for (std::size_t a = 0; a < actions.size() && !matched; ++a) {
      const Action& act = actions[a];
      if (std::fabs(act.steer - to.steer) > 1e-9) continue;
      const MotionState expect = transition(from, act, params);
      matched = expect.gear == to.gear && near_pose(expect.pose, to.pose, kTol);
    }
    if (!matched) {
      problems.push_back("segment " + std::to_string(i) + " is not produced by any action");
    } else if (!feasible(from, to, params, checker)) {
      problems.push_back("segment " + std::to_string(i) + " collides");
    }
  }

  const std::vector<MotionState> closing = closing_segment(states[p.closing_from].pose, scenario.goal, params);
  if (closing.size() != states.size() - p.closing_from - 1) {
    problems.push_back("closing segment has the wrong number of poses");
  } else {
    for (std::size_t i = 0; i < closing.size(); ++i) {
      const MotionState& s = states[p.closing_from + 1 + i];
      if (!near_pose(s.pose, closing[i].pose, kTol) || s.gear != closing[i].gear ||
          std::fabs(s.steer - closing[i].steer) > kTol) {
        problems.push_back("pose " + std::to_string(p.closing_from + 1 + i) + " is off the closing Dubins segment");
        break;
      }
    }
    for (std::size_t i = p.closing_from + 1; i < states.size(); ++i) {
      if (!checker.pose_free(states[i].pose)) {
        problems.push_back("pose " + std::to_string(i) + " collides");
        break;
      }
    }
  }

  try {
    const PathCost c = path_cost(states, scenario, weights);
    if (std::fabs(c.safety - p.cost.safety) > kTol || std::fabs(c.comfort - p.cost.comfort) > kTol ||
        std::fabs(c.efficiency - p.cost.efficiency) > kTol || std::fabs(c.total - p.cost.total) > kTol) {
      problems.push_back("stored cost differs from the recomputed cost");
    }
  } catch (const std::domain_error&) {
    problems.push_back("path collides");
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

constexpr double kPixelsPerMeter = 40.0;

const char* class_color(ObstacleClass cls) {
  switch (cls) {
    case ObstacleClass::vehicle: return "#d62728";
    case ObstacleClass::curb: return "#9467bd";
    case ObstacleClass::pillar: return "#000000";
  }
  return "#000000";
}

struct SvgFrame {
  const WorldBounds& b;
  double x(double wx) const { return (wx - b.min_x) * kPixelsPerMeter; }
  double y(double wy) const { return (b.max_y - wy) * kPixelsPerMeter; }
  std::string points(const ConvexPolygon& poly) const {
    std::string out;
    for (const Point2& p : poly.vertices()) {
      if (!out.empty()) out += ' ';
      out += fmt(x(p.x)) + "," + fmt(y(p.y));
    }
    return out;
  }
};

}  // namespace

std::string render_svg(const Scenario& s, const SvgOverlay& overlay) {
  const SvgFrame f{s.bounds};
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(s.bounds.width() * kPixelsPerMeter)
      << "\" height=\"" << fmt(s.bounds.height() * kPixelsPerMeter) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fmt(s.bounds.width() * kPixelsPerMeter) << "\" height=\""
      << fmt(s.bounds.height() * kPixelsPerMeter) << "\" fill=\"#ffffff\" stroke=\"#888888\"/>\n";
  if (overlay.visited != nullptr) {
    out << "<g fill=\"none\" stroke=\"#9ecae1\" stroke-opacity=\"0.35\" stroke-width=\"1\">\n";
    for (const MotionState& m : *overlay.visited) {
      out << "<polygon points=\"" << f.points(footprint_polygon(s.vehicle.footprint, m.pose)) << "\"/>\n";
    }
    out << "</g>\n";
  }
  for (const Obstacle& o : s.obstacles) {
    out << "<polygon points=\"" << f.points(o.polygon) << "\" fill=\"" << class_color(o.cls) << "\"/>\n";
  }
  out << "<polygon points=\"" << f.points(footprint_polygon(s.vehicle.footprint, s.start.pose))
      << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"3\"/>\n";
  out << "<polygon points=\"" << f.points(footprint_polygon(s.vehicle.footprint, s.goal))
      << "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"3\"/>\n";
  if (overlay.path != nullptr && !overlay.path->empty()) {
    out << "<polyline fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"3\" points=\"";
    for (std::size_t i = 0; i < overlay.path->size(); ++i) {
      const Point2& p = (*overlay.path)[i].pose.position;
      out << (i ? " " : "") << fmt(f.x(p.x)) << "," << fmt(f.y(p.y));
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Sweep

const char* const kSweepHeader = "disc,planner,median_ms,success_rate,median_cost";

std::vector<SweepRow> run_sweep(std::span<const Scenario> scenarios, std::span<const double> discretizations,
                                const RunConfig& config, const NetworkParams& model) {
  if (scenarios.empty()) throw std::invalid_argument("sweep over an empty scenario list");
  const NetworkEvaluator evaluator(std::make_shared<const NetworkParams>(model));
  std::vector<SweepRow> rows;
  for (double disc : discretizations) {
    if (!(disc > 0.0)) throw std::invalid_argument("discretization must be positive");
    RunConfig scaled = config;
    scaled.actions.step = config.actions.step * disc / 0.1;
    scaled.hastar.cell = disc;

    std::vector<double> ms[2], cost[2];
    std::size_t solved[2] = {0, 0};
    for (const Scenario& s : scenarios) {
      const SearchResult m = run_search(s, evaluator, scaled.search_config(s.vehicle));
      if (m.best_path) {
        ++solved[0];
        ms[0].push_back(m.wall_ms);
        cost[0].push_back(path_cost(m.best_path->states, s, config.weights).sum());
      }
      const AStarResult h = hybrid_astar(s, scaled.astar_config(s.vehicle));
      if (h.path) {
        ++solved[1];
        ms[1].push_back(h.wall_ms);
        cost[1].push_back(path_cost(*h.path, s, config.weights).sum());
      }
    }
    for (int k = 0; k < 2; ++k) {
      SweepRow row;
      row.disc = disc;
      row.planner = k == 0 ? "mcts" : "hastar";
      row.success_rate = static_cast<double>(solved[k]) / static_cast<double>(scenarios.size());
      if (!ms[k].empty()) {
        row.median_ms = config.record_wall_time ? percentile(ms[k], 0.5) : 0.0;
        row.median_cost = percentile(cost[k], 0.5);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string sweep_row(const SweepRow& r) {
  return fmt(r.disc) + "," + r.planner + "," + (r.median_ms ? fmt(*r.median_ms) : "") + "," + fmt(r.success_rate) +
         "," + (r.median_cost ? fmt(*r.median_cost) : "");
}

}  // namespace pkmc
