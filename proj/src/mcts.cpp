#include "pkmc/mcts.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace pkmc {

const char* to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::unexplored: return "UNEXPLORED";
    case NodeStatus::explored: return "EXPLORED";
    case NodeStatus::trimmed: return "TRIMMED";
  }
  return "?";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::exhausted: return "exhausted";
    case Termination::node_limit: return "node_limit";
    case Termination::time_limit: return "time_limit";
    case Termination::path_target: return "path_target";
  }
  return "?";
}

Termination termination_from_string(const std::string& name) {
  if (name == "exhausted") return Termination::exhausted;
  if (name == "node_limit") return Termination::node_limit;
  if (name == "time_limit") return Termination::time_limit;
  if (name == "path_target") return Termination::path_target;
  throw std::invalid_argument("unknown termination '" + name + "'");
}

bool SearchConfig::valid() const {
  return c_puct >= 0.0 && node_limit > 0 && time_limit_ms > 0.0 && path_target > 0 && max_depth > 0 &&
         actions.size() > 0 && weights.valid();
}

SearchTree::SearchTree(Scenario scenario, SearchConfig config, const Evaluator& evaluator)
    : scenario_(std::move(scenario)),
      config_(std::move(config)),
      checker_(scenario_),
      session_(evaluator.open(scenario_)) {
  if (!config_.valid()) {
    throw std::invalid_argument("invalid search configuration");
  }
  if (evaluator.action_count() != config_.actions.size()) {
    throw std::invalid_argument("evaluator action count " + std::to_string(evaluator.action_count()) +
                                " does not match the action set size " +
                                std::to_string(config_.actions.size()));
  }
  nodes_.reserve(std::min<std::size_t>(config_.node_limit + config_.actions.size(), 1u << 20));
  TreeNode root;
  root.id = 0;
  root.state = scenario_.start;
  if (checker_.pose_free(root.state.pose)) {
    root.cost = CostAccumulator::start(root.state, safety_clearance(root.state, checker_, config_.weights),
                                       config_.weights);
  }
  nodes_.push_back(std::move(root));
}

std::vector<MotionState> SearchTree::state_path(NodeId id) const {
  std::vector<MotionState> out;
  for (NodeId n = id; n != kNoNode; n = node(n).parent) {
    out.push_back(node(n).state);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

NodeId SearchTree::add_child(NodeId parent, int action, const MotionState& state, NodeStatus status) {
  TreeNode child;
  child.id = static_cast<NodeId>(nodes_.size());
  child.state = state;
  child.status = status;
  child.parent = parent;
  child.action = action;
  child.depth = node(parent).depth + 1;
  if (status != NodeStatus::trimmed) {
    const TreeNode& p = node(parent);
    child.cost = p.cost.extended(p.state, state, safety_clearance(state, checker_, config_.weights),
                                 config_.weights);
  }
  nodes_.push_back(std::move(child));
  return nodes_.back().id;
}

void SearchTree::record_connection(NodeId id, double length) {
  TreeNode& n = node(id);
  if (n.dest_connected) {
    return;
  }
  n.dest_connected = true;
  n.dest_connect_length = length;
  ++paths_found_;
  if (!nodes_to_first_path_) {
    nodes_to_first_path_ = nodes_.size();
  }
}

double puct_score(const TreeNode& node, std::size_t a, double c_puct) {
  return node.q[a] + c_puct * node.prior[a] *
                         std::sqrt((static_cast<double>(node.visits) + 1.0) /
                                   (static_cast<double>(node.edge_visits[a]) + 1.0));
}

std::optional<NodeId> select(SearchTree& tree) {
  const double c_puct = tree.config().c_puct;
  for (;;) {
    if (tree.root().status == NodeStatus::trimmed || tree.root().exhausted) {
      return std::nullopt;
    }
    if (tree.root().status == NodeStatus::unexplored) {
      return 0;
    }
    NodeId current = 0;
    bool restart = false;
    while (!restart) {
      TreeNode& n = tree.node(current);
      std::optional<std::size_t> best;
      double best_score = 0.0;
      for (std::size_t a = 0; a < n.children.size(); ++a) {
        const TreeNode& child = tree.node(n.children[a]);
        if (child.status == NodeStatus::trimmed || child.exhausted) {
          continue;
        }
        const double score = puct_score(n, a, c_puct);
        if (!best || score > best_score) {
          best = a;
          best_score = score;
        }
      }
      if (!best) {
        n.exhausted = true;
        restart = true;
        continue;
      }
      TreeNode& chosen = tree.node(n.children[*best]);
      if (chosen.status == NodeStatus::trimmed) {
        throw std::logic_error("select: TRIMMED node reached");
      }
      if (chosen.status == NodeStatus::unexplored) {
        return chosen.id;
      }
      current = chosen.id;
    }
  }
}

void trim(SearchTree& tree, NodeId id) {
  NodeId current = id;
  while (current != kNoNode) {
    TreeNode& n = tree.node(current);
    n.status = NodeStatus::trimmed;
    if (n.parent == kNoNode) {
      return;
    }
    TreeNode& parent = tree.node(n.parent);
    const auto a = static_cast<std::size_t>(n.action);
    const double share = parent.prior[a];
    parent.prior[a] = 0.0;
    std::size_t living = 0;
    for (NodeId c : parent.children) {
      if (tree.node(c).status != NodeStatus::trimmed) ++living;
    }
    if (living > 0) {
      const double bonus = share / static_cast<double>(living);
      for (std::size_t b = 0; b < parent.children.size(); ++b) {
        if (tree.node(parent.children[b]).status != NodeStatus::trimmed) {
          parent.prior[b] += bonus;
        }
      }
      return;
    }
    current = parent.id;
  }
}

ExpandResult expand(SearchTree& tree, NodeId id) {
  const SearchConfig& config = tree.config();
  const std::size_t action_count = config.actions.size();
  if (tree.node(id).status != NodeStatus::unexplored) {
    throw std::logic_error("expand: node is not UNEXPLORED");
  }
  if (tree.node_count() + action_count > config.node_limit) {
    return ExpandResult::node_limit;
  }

  const TreeNode& self = tree.node(id);
  const MotionState parent_state = self.parent == kNoNode ? self.state : tree.node(self.parent).state;
  const Evaluation eval = tree.session().evaluate(self.state, parent_state);
  if (eval.p.size() != action_count) {
    throw std::logic_error("expand: evaluator returned a policy of the wrong length");
  }

  const MotionState state = self.state;
  const int child_depth = self.depth + 1;
  const VehicleParams& params = tree.scenario().vehicle;
  std::vector<NodeId> children(action_count);
  std::size_t living = 0;
  double trimmed_share = 0.0;
  for (std::size_t a = 0; a < action_count; ++a) {
    const MotionState next = transition(state, config.actions[a], params);
    const bool ok = child_depth <= config.max_depth && feasible(state, next, params, tree.checker());
    children[a] = tree.add_child(id, static_cast<int>(a), next, ok ? NodeStatus::unexplored : NodeStatus::trimmed);
    if (ok) {
      ++living;
    } else {
      trimmed_share += eval.p[a];
    }
  }

  TreeNode& n = tree.node(id);
  n.children = std::move(children);
  n.q.assign(action_count, 0.0);
  n.edge_visits.assign(action_count, 0);
  n.prior.assign(action_count, 0.0);
  n.net_value = eval.v;
  n.expanded = true;
  n.status = NodeStatus::explored;
  if (living == 0) {
    trim(tree, id);
    return ExpandResult::expanded;
  }
  const double bonus = trimmed_share / static_cast<double>(living);
  for (std::size_t a = 0; a < action_count; ++a) {
    if (tree.node(n.children[a]).status != NodeStatus::trimmed) {
      n.prior[a] = eval.p[a] + bonus;
    }
  }
  return ExpandResult::expanded;
}

double simulate(SearchTree& tree, NodeId id) {
  const TreeNode& n = tree.node(id);
  const CostWeights& w = tree.config().weights;
  const double value = node_value(n.net_value, n.cost.cost(), w);
  if (const auto length = dubins_connects(n.state.pose, tree.destination(), tree.scenario().vehicle, tree.checker())) {
    tree.record_connection(id, *length);
  }
  return value;
}

void backpropagate(SearchTree& tree, NodeId id, double value) {
  TreeNode* n = &tree.node(id);
  n->stored_value = value;
  while (n->parent != kNoNode) {
    if (n->dest_connected) {
      value = std::max(value, n->stored_value);
    }
    const auto a = static_cast<std::size_t>(n->action);
    n = &tree.node(n->parent);
    const double count = static_cast<double>(n->edge_visits[a]);
    n->q[a] = (count * n->q[a] + value) / (count + 1.0);
    n->edge_visits[a] += 1;
    n->visits += 1;
  }
}

std::optional<PlannedPath> extract_best_path(const SearchTree& tree) {
  const CostWeights& w = tree.config().weights;
  const TreeNode* best = nullptr;
  double best_score = 0.0;
  for (const TreeNode& n : tree.nodes()) {
    if (!n.dest_connected) {
      continue;
    }
    const double score = node_value(1.0, n.cost.cost(), w) - w.w_dist * *n.dest_connect_length;
    if (best == nullptr || score > best_score) {
      best = &n;
      best_score = score;
    }
  }
  if (best == nullptr) {
    return std::nullopt;
  }
  PlannedPath path;
  path.node = best->id;
  path.states = tree.state_path(best->id);
  path.tree_states = path.states.size();
  path.closing_length = *best->dest_connect_length;
  const std::vector<MotionState> closing =
      closing_segment(best->state.pose, tree.destination(), tree.scenario().vehicle);
  path.states.insert(path.states.end(), closing.begin(), closing.end());
  return path;
}

SearchResult run_search(const Scenario& scenario, const Evaluator& evaluator, const SearchConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  SearchResult result;
  result.tree = std::make_unique<SearchTree>(scenario, config, evaluator);
  SearchTree& tree = *result.tree;
  if (!tree.checker().pose_free(scenario.start.pose)) {
    throw PlanningError("start pose is in collision");
  }
  if (!tree.checker().pose_free(scenario.goal)) {
    throw PlanningError("destination pose is in collision");
  }

  // The root is expanded and simulated once before the cycles start.
  if (expand(tree, 0) == ExpandResult::node_limit) {
    result.termination = Termination::node_limit;
  } else {
    backpropagate(tree, 0, simulate(tree, 0));
    for (;;) {
      if (tree.paths_found() >= config.path_target) {
        result.termination = Termination::path_target;
        break;
      }
      if (elapsed_ms() > config.time_limit_ms) {
        result.termination = Termination::time_limit;
        break;
      }
      const std::optional<NodeId> leaf = select(tree);
      if (!leaf) {
        result.termination = Termination::exhausted;
        break;
      }
      if (expand(tree, *leaf) == ExpandResult::node_limit) {
        result.termination = Termination::node_limit;
        break;
      }
      backpropagate(tree, *leaf, simulate(tree, *leaf));
      ++result.cycles;
    }
  }

  result.wall_ms = elapsed_ms();
  result.nodes_created = tree.node_count();
  result.nodes_to_first_path = tree.nodes_to_first_path();
  result.best_path = extract_best_path(tree);
  return result;
}

void dump_tree(const SearchTree& tree, std::ostream& out) {
  out << std::setprecision(17);
  for (const TreeNode& n : tree.nodes()) {
    double q = 0.0;
    if (n.parent != kNoNode) {
      const TreeNode& p = tree.node(n.parent);
      if (!p.q.empty()) q = p.q[static_cast<std::size_t>(n.action)];
    }
    out << n.id << ' ' << n.parent << ' ' << n.action << ' ' << to_string(n.status) << ' ' << n.visits << ' '
        << q << ' ' << n.stored_value << ' ' << (n.dest_connected ? 1 : 0) << '\n';
  }
}

}  // namespace pkmc
