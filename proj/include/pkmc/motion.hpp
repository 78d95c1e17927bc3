#pragma once

#include <optional>
#include <vector>

#include "pkmc/dubins.hpp"
#include "pkmc/scenario.hpp"
#include "pkmc/vehicle.hpp"

namespace pkmc {

/// Spacing used for every collision sweep (matches the 0.1 m position grid).
inline constexpr double kCollisionStep = 0.1;

/// Poses along the move from `from` to `to` (produced by transition) with
/// arc-length spacing <= max_step, endpoints included. Intermediate poses
/// follow the circular arc implied by the applied steer; a linear position
/// correction makes the sweep end exactly on the Euler-step endpoint.
std::vector<Pose> motion_samples(const MotionState& from, const MotionState& to,
                                 const VehicleParams& params, double max_step = kCollisionStep);

/// Every swept footprint is inside bounds and collision-free.
bool feasible(const MotionState& from, const MotionState& to, const Scenario& scenario);
bool feasible(const MotionState& from, const MotionState& to, const VehicleParams& params,
              const CollisionChecker& checker);

/// Length of the shortest Dubins path at radius params.turn_radius() if that
/// path, swept at kCollisionStep, stays free; nullopt otherwise.
std::optional<double> dubins_connects(const Pose& from, const Pose& to, const VehicleParams& params,
                                      const Scenario& scenario);
std::optional<double> dubins_connects(const Pose& from, const Pose& to, const VehicleParams& params,
                                      const CollisionChecker& checker);

/// States of the closing Dubins segment after `from` (exclusive) up to `to`,
/// with forward gear and the steer of each sampled piece.
std::vector<MotionState> closing_segment(const Pose& from, const Pose& to, const VehicleParams& params);

}  // namespace pkmc
