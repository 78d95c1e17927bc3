#include "pkmc/hybrid_astar.hpp"

#include <chrono>
#include <cmath>
#include <queue>
#include <unordered_set>

#include "pkmc/dubins.hpp"
#include "pkmc/motion.hpp"

namespace pkmc {

std::size_t GridKeyHash::operator()(const GridKey& k) const {
  std::uint64_t h = mix_seed(static_cast<std::uint64_t>(k.xi), static_cast<std::uint64_t>(k.yi));
  h = mix_seed(h, static_cast<std::uint64_t>(k.phii));
  return static_cast<std::size_t>(mix_seed(h, k.gear == Gear::forward ? 1 : 2));
}

GridKey grid_key(const MotionState& state, double cell, double heading_bin) {
  return GridKey{static_cast<std::int64_t>(std::floor(state.pose.position.x / cell)),
                 static_cast<std::int64_t>(std::floor(state.pose.position.y / cell)),
                 static_cast<std::int64_t>(std::floor(state.pose.heading / heading_bin)), state.gear};
}

double astar_heuristic(const MotionState& state, const Pose& goal, const VehicleParams& params,
                       const CostWeights& weights) {
  const auto path = shortest_dubins(state.pose, goal, params.turn_radius());
  return path ? weights.w_dist * path->length() : 0.0;
}

bool AStarConfig::valid() const {
  return actions.size() > 0 && weights.valid() && cell > 0.0 && heading_bin > 0.0 && heuristic_weight >= 0.0 &&
         node_limit > 0 && time_limit_ms > 0.0;
}

namespace {

struct SearchNode {
  MotionState state;
  CostAccumulator cost;
  double g = 0.0;
  std::int64_t parent = -1;
};

struct OpenEntry {
  double f;
  std::size_t index;  // insertion order doubles as the tie-break

  bool operator>(const OpenEntry& o) const { return f != o.f ? f > o.f : index > o.index; }
};

}  // namespace

AStarResult hybrid_astar(const Scenario& scenario, const AStarConfig& config) {
  if (!config.valid()) {
    throw std::invalid_argument("invalid Hybrid A* configuration");
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  const CollisionChecker checker(scenario);
  const VehicleParams& params = scenario.vehicle;
  const CostWeights& w = config.weights;
  if (!checker.pose_free(scenario.start.pose)) throw PlanningError("start pose is in collision");
  if (!checker.pose_free(scenario.goal)) throw PlanningError("destination pose is in collision");

  std::vector<SearchNode> nodes;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  std::unordered_set<GridKey, GridKeyHash> closed;
  auto push = [&](SearchNode node) {
    const double h = config.heuristic_weight * astar_heuristic(node.state, scenario.goal, params, w);
    open.push({node.g + h, nodes.size()});
    nodes.push_back(std::move(node));
  };

  SearchNode root;
  root.state = scenario.start;
  root.cost = CostAccumulator::start(root.state, safety_clearance(root.state, checker, w), w);
  root.g = -root.cost.cost().sum();
  push(root);

  AStarResult result;
  std::optional<std::size_t> found;
  double closing = 0.0;
  for (;;) {
    if (open.empty()) {
      result.termination = Termination::exhausted;
      break;
    }
    if (elapsed_ms() > config.time_limit_ms) {
      result.termination = Termination::time_limit;
      break;
    }
    const std::size_t index = open.top().index;
    open.pop();
    if (!closed.insert(grid_key(nodes[index].state, config.cell, config.heading_bin)).second) continue;
    const MotionState state = nodes[index].state;
    result.visited.push_back(state);
    ++result.nodes_expanded;
    if (const auto length = dubins_connects(state.pose, scenario.goal, params, checker)) {
      found = index;
      closing = *length;
      result.termination = Termination::path_target;
      break;
    }
    if (nodes.size() + config.actions.size() > config.node_limit) {
      result.termination = Termination::node_limit;
      break;
    }
    for (std::size_t a = 0; a < config.actions.size(); ++a) {
      const MotionState next = transition(state, config.actions[a], params);
      if (closed.count(grid_key(next, config.cell, config.heading_bin))) continue;
      if (!feasible(state, next, params, checker)) continue;
      SearchNode child;
      child.state = next;
      child.cost = nodes[index].cost.extended(state, next, safety_clearance(next, checker, w), w);
      child.g = -child.cost.cost().sum();
      child.parent = static_cast<std::int64_t>(index);
      push(std::move(child));
    }
  }

  result.nodes_created = nodes.size();
  if (found) {
    std::vector<MotionState> states;
    std::vector<double> g;
    for (std::int64_t i = static_cast<std::int64_t>(*found); i >= 0; i = nodes[static_cast<std::size_t>(i)].parent) {
      states.push_back(nodes[static_cast<std::size_t>(i)].state);
      g.push_back(nodes[static_cast<std::size_t>(i)].g);
    }
    std::reverse(states.begin(), states.end());
    std::reverse(g.begin(), g.end());
    result.tree_states = states.size();
    result.closing_length = closing;
    result.g = std::move(g);
    const std::vector<MotionState> tail = closing_segment(states.back().pose, scenario.goal, params);
    states.insert(states.end(), tail.begin(), tail.end());
    result.path = std::move(states);
  }
  result.wall_ms = elapsed_ms();
  return result;
}

}  // namespace pkmc
