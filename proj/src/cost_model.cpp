#include "pkmc/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pkmc {

bool CostWeights::valid() const {
  return safety_threshold >= 0.0 && w_safety >= 0.0 && w_gear >= 0.0 && w_steer >= 0.0 &&
         w_dist >= 0.0 && alpha0 >= 0.0 && alpha1 >= 0.0 && alpha0 + alpha1 <= 1.0 + 1e-12;
}

CostAccumulator CostAccumulator::start(const MotionState& /*state*/, double clearance,
                                       const CostWeights& w) {
  CostAccumulator acc;
  acc.safety_ = -w.w_safety * std::max(0.0, w.safety_threshold - clearance);
  return acc;
}

CostAccumulator CostAccumulator::extended(const MotionState& prev, const MotionState& next,
                                          double clearance, const CostWeights& w) const {
  CostAccumulator acc = *this;
  acc.safety_ -= w.w_safety * std::max(0.0, w.safety_threshold - clearance);
  if (next.gear != prev.gear) {
    acc.comfort_ -= w.w_gear;
  }
  acc.comfort_ -= w.w_steer * std::fabs(next.steer - prev.steer);
  acc.efficiency_ -= w.w_dist * distance(prev.pose.position, next.pose.position);
  return acc;
}

PathCost CostAccumulator::cost() const {
  PathCost c;
  c.safety = safety_;
  c.comfort = comfort_;
  c.efficiency = efficiency_;
  c.total = std::clamp(c.sum(), -1.0, 0.0);
  return c;
}

double safety_clearance(const MotionState& state, const CollisionChecker& checker, const CostWeights& w) {
  const ConvexPolygon body = footprint_polygon(checker.footprint(), state.pose);
  return checker.clearance(body, w.safety_threshold);
}

PathCost path_cost(std::span<const MotionState> states, const Scenario& scenario, const CostWeights& weights) {
  if (states.empty()) {
    throw std::invalid_argument("path_cost: empty state sequence");
  }
  const CollisionChecker checker(scenario);
  CostAccumulator acc = CostAccumulator::start(states[0], safety_clearance(states[0], checker, weights), weights);
  for (std::size_t i = 1; i < states.size(); ++i) {
    acc = acc.extended(states[i - 1], states[i], safety_clearance(states[i], checker, weights), weights);
  }
  return acc.cost();
}

double node_value(double v, const PathCost& cost, const CostWeights& weights) {
  return weights.alpha0 * v + weights.alpha1 * cost.total;
}

double terminal_reward(bool reached) { return reached ? 1.0 : 0.0; }

}  // namespace pkmc
