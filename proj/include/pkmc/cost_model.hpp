#pragma once

#include <span>

#include "pkmc/scenario.hpp"
#include "pkmc/vehicle.hpp"

namespace pkmc {

struct CostWeights {
  double safety_threshold = 0.5;  // meters
  double w_safety = 0.1;          // per meter of threshold violation, per state
  double w_gear = 0.05;           // per gear change
  double w_steer = 0.02;          // per radian of steer change
  double w_dist = 0.01;           // per meter travelled
  double alpha0 = 0.7;
  double alpha1 = 0.3;

  bool valid() const;
  friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

/// Nonpositive cost components. `total` is their sum clamped to [-1, 0].
struct PathCost {
  double safety = 0.0;
  double comfort = 0.0;
  double efficiency = 0.0;
  double total = 0.0;

  /// Unclamped sum of the components.
  double sum() const { return safety + comfort + efficiency; }
};

/// Running cost of a state sequence; the tree and the baseline extend it one
/// state at a time instead of re-walking the path.
class CostAccumulator {
 public:
  CostAccumulator() = default;

  /// First state of a path with its obstacle clearance.
  static CostAccumulator start(const MotionState& state, double clearance, const CostWeights& w);

  /// Cost after appending `next` (reached from `prev`).
  CostAccumulator extended(const MotionState& prev, const MotionState& next, double clearance,
                           const CostWeights& w) const;

  PathCost cost() const;

 private:
  double safety_ = 0.0;
  double comfort_ = 0.0;
  double efficiency_ = 0.0;
};

/// Clearance used by the safety hinge: min(threshold, clearance); throws
/// std::domain_error on collision.
double safety_clearance(const MotionState& state, const CollisionChecker& checker, const CostWeights& w);

/// Cost of a full state sequence. Throws std::invalid_argument for an empty
/// sequence and std::domain_error if any state collides.
PathCost path_cost(std::span<const MotionState> states, const Scenario& scenario, const CostWeights& weights);

/// alpha0 * v + alpha1 * cost.total
double node_value(double v, const PathCost& cost, const CostWeights& weights);

double terminal_reward(bool reached);

}  // namespace pkmc
