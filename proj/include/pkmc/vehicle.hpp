#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pkmc/geometry.hpp"

namespace pkmc {

struct VehicleParams {
  double wheelbase = 2.5;
  double max_steer = 0.6;
  VehicleFootprint footprint;

  bool valid() const {
    return wheelbase > 0.0 && max_steer > 0.0 && max_steer < 0.5 * kPi && footprint.valid();
  }
  /// Tightest kinematically feasible turn radius.
  double turn_radius() const { return wheelbase / std::tan(max_steer); }

  friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

enum class Gear { forward, reverse };

const char* to_string(Gear gear);
Gear gear_from_string(const std::string& name);

/// One discrete move: signed travel distance (negative = reverse) and front
/// wheel angle.
struct Action {
  double distance = 0.0;
  double steer = 0.0;

  friend bool operator==(const Action&, const Action&) = default;
};

struct MotionState {
  Pose pose;
  Gear gear = Gear::forward;
  double steer = 0.0;  // last applied front wheel angle

  friend bool operator==(const MotionState&, const MotionState&) = default;
};

/// Discretized action space. Index contract shared by the search tree and
/// the network policy head: forward block with ascending steer, then the
/// reverse block with ascending steer.
class ActionSet {
 public:
  ActionSet() = default;

  std::size_t size() const { return actions_.size(); }
  const Action& operator[](std::size_t i) const { return actions_[i]; }
  const std::vector<Action>& actions() const { return actions_; }

  int steer_count() const { return steer_count_; }
  double step() const { return step_; }
  double max_steer() const { return max_steer_; }

  friend bool operator==(const ActionSet&, const ActionSet&) = default;

 private:
  friend ActionSet make_action_set(const VehicleParams&, int, double);

  std::vector<Action> actions_;
  int steer_count_ = 0;
  double step_ = 0.0;
  double max_steer_ = 0.0;
};

/// Throws std::invalid_argument for even or < 3 steer counts or step <= 0.
ActionSet make_action_set(const VehicleParams& params, int steer_count, double step);

/// Single Euler step of the bicycle model; heading is renormalized.
MotionState transition(const MotionState& state, const Action& action, const VehicleParams& params);

}  // namespace pkmc
