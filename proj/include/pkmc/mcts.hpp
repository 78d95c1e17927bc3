#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pkmc/cost_model.hpp"
#include "pkmc/evaluator.hpp"
#include "pkmc/motion.hpp"
#include "pkmc/scenario.hpp"
#include "pkmc/vehicle.hpp"

namespace pkmc {

enum class NodeStatus { unexplored, explored, trimmed };

const char* to_string(NodeStatus status);

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct TreeNode {
  NodeId id = kNoNode;
  MotionState state;
  NodeStatus status = NodeStatus::unexplored;
  NodeId parent = kNoNode;
  int action = -1;  // index of the action that produced this node
  int depth = 0;

  // Per-action statistics; sized on expansion.
  std::vector<NodeId> children;
  std::vector<double> prior;
  std::vector<double> q;
  std::vector<std::uint32_t> edge_visits;

  std::uint32_t visits = 0;   // N(n)
  double stored_value = 0.0;  // V(n), set by the node's own backpropagation
  double net_value = 0.5;     // v from the evaluator pass made at expansion
  bool expanded = false;
  bool exhausted = false;
  bool dest_connected = false;
  std::optional<double> dest_connect_length;
  CostAccumulator cost;  // root -> node
};

struct SearchConfig {
  double c_puct = 1.0;
  std::size_t node_limit = 20000;
  double time_limit_ms = 1.0e9;
  std::size_t path_target = 5;
  int max_depth = 30;
  ActionSet actions;
  CostWeights weights;

  bool valid() const;
};

enum class Termination { exhausted, node_limit, time_limit, path_target };

const char* to_string(Termination t);
Termination termination_from_string(const std::string& name);

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Search tree over one scenario. Nodes live in an arena indexed by id; the
/// root is node 0.
class SearchTree {
 public:
  SearchTree(Scenario scenario, SearchConfig config, const Evaluator& evaluator);

  const Scenario& scenario() const { return scenario_; }
  const SearchConfig& config() const { return config_; }
  const Pose& destination() const { return scenario_.goal; }
  const CollisionChecker& checker() const { return checker_; }
  EvaluationSession& session() { return *session_; }

  TreeNode& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
  const TreeNode& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  TreeNode& root() { return nodes_.front(); }
  const TreeNode& root() const { return nodes_.front(); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t paths_found() const { return paths_found_; }
  std::optional<std::size_t> nodes_to_first_path() const { return nodes_to_first_path_; }

  /// States from the root to `id`, inclusive.
  std::vector<MotionState> state_path(NodeId id) const;

  NodeId add_child(NodeId parent, int action, const MotionState& state, NodeStatus status);
  void record_connection(NodeId id, double length);

 private:
  Scenario scenario_;
  SearchConfig config_;
  CollisionChecker checker_;
  std::unique_ptr<EvaluationSession> session_;
  std::vector<TreeNode> nodes_;
  std::size_t paths_found_ = 0;
  std::optional<std::size_t> nodes_to_first_path_;
};

/// PUCT descent from the root to the first UNEXPLORED node. Ties go to the
/// lowest action index. nullopt when nothing selectable remains.
std::optional<NodeId> select(SearchTree& tree);

/// PUCT score of action `a` at `node`.
double puct_score(const TreeNode& node, std::size_t a, double c_puct);

enum class ExpandResult { expanded, node_limit };

/// Spawns one child per action, trims infeasible ones at birth and
/// redistributes their prior share evenly among surviving siblings. A node
/// whose children are all trimmed becomes TRIMMED, recursively upward.
ExpandResult expand(SearchTree& tree, NodeId id);

/// Marks `id` TRIMMED and repairs the priors of its ancestors.
void trim(SearchTree& tree, NodeId id);

/// V = alpha0 * v + alpha1 * C_path, plus the destination connection test.
double simulate(SearchTree& tree, NodeId id);

/// Backpropagation with the keep-best rule for destination-connected nodes.
void backpropagate(SearchTree& tree, NodeId id, double value);

/// Tree path plus the closing Dubins segment.
struct PlannedPath {
  std::vector<MotionState> states;  // start state first, goal pose last
  std::size_t tree_states = 0;      // leading states produced by actions (incl. start)
  double closing_length = 0.0;
  NodeId node = kNoNode;            // dest-connected node the path goes through
};

/// Best destination-connected node by node_value(1, C_path) - w_dist * L.
std::optional<PlannedPath> extract_best_path(const SearchTree& tree);

struct SearchResult {
  std::unique_ptr<SearchTree> tree;
  Termination termination = Termination::exhausted;
  double wall_ms = 0.0;
  std::size_t nodes_created = 0;
  std::size_t cycles = 0;
  std::optional<std::size_t> nodes_to_first_path;
  std::optional<PlannedPath> best_path;
};

/// Full select -> expand -> simulate -> backpropagate loop. Throws
/// PlanningError when the start or the destination is in collision.
SearchResult run_search(const Scenario& scenario, const Evaluator& evaluator, const SearchConfig& config);

/// One line per node: id parent action status N Q V dest_connected.
void dump_tree(const SearchTree& tree, std::ostream& out);

}  // namespace pkmc
