#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pkmc/cost_model.hpp"
#include "pkmc/mcts.hpp"
#include "pkmc/scenario.hpp"
#include "pkmc/vehicle.hpp"

namespace pkmc {

/// Quantized state used for the closed set.
struct GridKey {
  std::int64_t xi = 0;
  std::int64_t yi = 0;
  std::int64_t phii = 0;
  Gear gear = Gear::forward;

  friend bool operator==(const GridKey&, const GridKey&) = default;
};

struct GridKeyHash {
  std::size_t operator()(const GridKey& k) const;
};

GridKey grid_key(const MotionState& state, double cell = 0.1, double heading_bin = 0.01);

/// w_dist times the obstacle-free Dubins length to `goal`.
double astar_heuristic(const MotionState& state, const Pose& goal, const VehicleParams& params,
                       const CostWeights& weights);

struct AStarConfig {
  ActionSet actions;
  CostWeights weights;
  double cell = 0.1;          // meters
  double heading_bin = 0.01;  // radians
  double heuristic_weight = 1.0;  // 0 gives Dijkstra
  std::size_t node_limit = 20000;
  double time_limit_ms = 1.0e9;

  bool valid() const;
};

struct AStarResult {
  std::optional<std::vector<MotionState>> path;  // start first, closing Dubins segment included
  std::size_t tree_states = 0;                   // leading states produced by actions
  double closing_length = 0.0;
  std::vector<double> g;                         // cost-to-come along the action part of the path
  std::size_t nodes_created = 0;
  std::size_t nodes_expanded = 0;
  double wall_ms = 0.0;
  Termination termination = Termination::exhausted;
  std::vector<MotionState> visited;              // expanded states, in order
};

/// Best-first search over the shared action set. Ties in f go to the earlier
/// inserted node; a grid key is closed by the first node popped into it.
/// Throws PlanningError when the start or the destination is in collision.
AStarResult hybrid_astar(const Scenario& scenario, const AStarConfig& config);

}  // namespace pkmc
